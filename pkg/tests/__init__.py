# テストパッケージ