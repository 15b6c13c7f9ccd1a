"""
コマンドラインインターフェース

サブコマンド:
  maximize    設定ファイルの目的関数を sdrfw / fw / pga で最大化
  quadratic   ランダム二次関数の予算別比較
  stability   グラフの安定数推定
  online      オンライン勾配上昇法と α-regret
  smoothness  平滑性定数 L の計算（JSON 出力）
  check       目的関数の性質の検査（失敗があれば終了コード 1）
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Union

from drsubmax.config import RunConfig, config
from drsubmax.errors import ConfigError, ConvergenceError, GPInfeasibleError, UsageError
from drsubmax.graphs import GRAPH_FORMATS, parse_graph
from drsubmax.harness import (
    dumps_json,
    emit,
    run_checks,
    run_maximize,
    run_online,
    run_quadratic_experiment,
    run_smoothness,
    run_stability,
)
from drsubmax.utils import format_error_payload, sanitize_error_message


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def configure_logging(level: Optional[str] = None) -> None:
    """ルートロガーを stderr 向けに設定（stdout は結果の出力専用）"""
    logging.basicConfig(
        level=(level or config.LOG_LEVEL).upper(),
        format=config.LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


class _ArgumentParser(argparse.ArgumentParser):
    """使い方の誤りも他の失敗と同じ JSON 形式で stderr に出力する"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        error = UsageError(message, prog=self.prog)
        sys.stderr.write(json.dumps(format_error_payload(error), ensure_ascii=False) + "\n")
        self.exit(EXIT_BAD_INPUT)


def _parse_x1(value: str) -> Union[str, List[float]]:
    if value in ("zero", "uniform"):
        return value
    try:
        return [float(item) for item in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--x1 must be 'zero', 'uniform' or comma-separated floats, got {value!r}")


def _parse_floats(value: str) -> List[float]:
    try:
        return [float(item) for item in value.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {value!r}")


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="実行設定 JSON ファイル")
    parser.add_argument("--seed", type=int, help="乱数シード（設定ファイルより優先）")
    parser.add_argument("--out", help="出力ファイル（省略時は stdout）")
    parser.add_argument("--format", choices=("csv", "json"), help="出力形式")
    parser.add_argument("--mode", choices=("constant", "corner", "gp"), help="平滑性定数の計算モード")
    parser.add_argument("--timing", action="store_true", help="elapsed_s 列に経過時間を記録")
    parser.add_argument("--dump-iterates", action="store_true", help="各反復の点を列として出力")
    parser.add_argument("--log-level", help="ログレベル（DEBUG, INFO, WARNING, ERROR）")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="drsubmax", description="Strongly DR-submodular maximization")
    subparsers = parser.add_subparsers(dest="command", required=True)

    maximize = subparsers.add_parser("maximize", help="設定ファイルの問題を最大化")
    _common_arguments(maximize)
    maximize.add_argument("--algorithm", choices=("sdrfw", "fw", "pga"))
    maximize.add_argument("--x1", type=_parse_x1)

    quadratic = subparsers.add_parser("quadratic", help="ランダム二次関数の予算別比較")
    _common_arguments(quadratic)
    quadratic.add_argument("--n", type=int)
    quadratic.add_argument("--budgets", type=_parse_floats)
    quadratic.add_argument("--mu", type=float)

    stability = subparsers.add_parser("stability", help="グラフの安定数推定")
    _common_arguments(stability)
    stability.add_argument("--graph", help="グラフファイル")
    stability.add_argument("--graph-format", choices=GRAPH_FORMATS)
    stability.add_argument("--iterations", type=int)
    stability.add_argument("--x1", type=_parse_x1)

    online = subparsers.add_parser("online", help="オンライン勾配上昇法")
    _common_arguments(online)
    online.add_argument("--n", type=int)
    online.add_argument("--horizon", type=int)
    online.add_argument("--step-rule", choices=("strongly_convex", "fixed"))
    online.add_argument("--mu", type=float)

    smoothness = subparsers.add_parser("smoothness", help="平滑性定数 L の計算")
    _common_arguments(smoothness)

    check = subparsers.add_parser("check", help="目的関数の性質の検査")
    _common_arguments(check)
    return parser


def _load_run_config(args: argparse.Namespace, required: bool = False) -> RunConfig:
    if args.config:
        rc = RunConfig.from_file(args.config)
    elif required:
        raise ConfigError(f"{args.command} needs --config")
    else:
        rc = RunConfig()
    overrides = {"seed": args.seed, "format": args.format, "mode": args.mode,
                 "output": args.out, "algorithm": getattr(args, "algorithm", None),
                 "x1": getattr(args, "x1", None)}
    for key, value in overrides.items():
        if value is not None:
            setattr(rc, key, value)
    rc.validate()
    return rc


def _setting(args: argparse.Namespace, rc: RunConfig, key: str, cli_value, default):
    """CLI 引数、設定ファイル、グローバル既定値の順に値を決める"""
    if cli_value is not None:
        return cli_value
    return getattr(rc, key) if args.config else default


def _write_report(text: str, output: Optional[str]) -> None:
    """レポートをファイルに書き込む（output が無ければ stdout）"""
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"結果を書き込みました: {path}")


def _emit(result, args: argparse.Namespace, rc: RunConfig) -> None:
    text = emit(result, rc.format, rc.output, run_config=rc.to_dict(), seed=rc.seed,
                timing=args.timing or config.RECORD_TIMING, dump_iterates=args.dump_iterates)
    if rc.output is None:
        sys.stdout.write(text)


def _command_maximize(args: argparse.Namespace) -> int:
    rc = _load_run_config(args, required=True)
    _emit(run_maximize(rc), args, rc)
    return EXIT_OK


def _command_quadratic(args: argparse.Namespace) -> int:
    rc = _load_run_config(args)
    n = _setting(args, rc, "n", args.n, config.QUADRATIC_DIMENSION)
    result = run_quadratic_experiment(n=n, s_values=args.budgets, seed=rc.seed, mu=args.mu,
                                      entry_low=rc.entry_low, entry_high=rc.entry_high)
    _emit(result, args, rc)
    return EXIT_OK


def _command_stability(args: argparse.Namespace) -> int:
    rc = _load_run_config(args)
    path = args.graph or rc.graph
    if not path:
        raise ConfigError("stability needs --graph or a config with a graph path")
    graph = parse_graph(path, args.graph_format or rc.graph_format)
    x1 = args.x1 if args.x1 is not None else ("uniform" if rc.x1 == "zero" else rc.x1)
    # 設定ファイルの K が整数なら反復回数として使う
    configured = rc.K if isinstance(rc.K, int) else rc.iterations
    iterations = args.iterations if args.iterations is not None else \
        (configured if args.config else config.STABILITY_ITERATIONS)
    result = run_stability(graph, iterations=iterations, x1=x1,
                           mode=_setting(args, rc, "mode", args.mode, "constant"), seed=rc.seed)
    _emit(result, args, rc)
    return EXIT_OK


def _command_online(args: argparse.Namespace) -> int:
    rc = _load_run_config(args)
    step_rule = args.step_rule or rc.step_rule
    mu = args.mu if args.mu is not None else (1.0 if rc.mu == "auto" else float(rc.mu))
    result = run_online(n=_setting(args, rc, "n", args.n, config.ONLINE_DIMENSION),
                        horizon=_setting(args, rc, "horizon", args.horizon, config.ONLINE_HORIZON),
                        seed=rc.seed, step_rule=step_rule, mu=mu)
    _emit(result, args, rc)
    return EXIT_OK


def _command_smoothness(args: argparse.Namespace) -> int:
    rc = _load_run_config(args, required=True)
    text = dumps_json(run_smoothness(rc))
    _write_report(text, rc.output)
    return EXIT_OK


def _command_check(args: argparse.Namespace) -> int:
    rc = _load_run_config(args, required=True)
    reports = run_checks(rc)
    failed = [r.name for r in reports if r.notes.get("required") and not r.passed]
    text = dumps_json({"passed": not failed, "failed": failed, "reports": [r.to_dict() for r in reports]})
    _write_report(text, rc.output)
    if failed:
        logger.error(f"検査に失敗しました: {', '.join(failed)}")
        return EXIT_FAILURE
    return EXIT_OK


COMMANDS = {
    "maximize": _command_maximize,
    "quadratic": _command_quadratic,
    "stability": _command_stability,
    "online": _command_online,
    "smoothness": _command_smoothness,
    "check": _command_check,
}


def _handle_error(error: Exception) -> int:
    """例外を終了コードに対応付け、機械可読なエラー情報を stderr に出力"""
    if isinstance(error, (ConvergenceError, GPInfeasibleError)):
        logger.error(f"数値計算に失敗しました: {sanitize_error_message(error)}")
        code = EXIT_NUMERICAL
    elif isinstance(error, ValueError):
        logger.error(f"入力が不正です: {sanitize_error_message(error)}")
        code = EXIT_BAD_INPUT
    elif isinstance(error, OSError):
        logger.error(f"ファイルの入出力に失敗しました: {sanitize_error_message(error)}")
        code = EXIT_IO
    else:
        logger.error(f"予期しないエラー: {sanitize_error_message(error)}")
        code = EXIT_FAILURE
    logger.debug("トレースバック", exc_info=error)
    sys.stderr.write(json.dumps(format_error_payload(error), ensure_ascii=False) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI のエントリーポイント"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    logger.debug(f"コマンド: {args.command}, 引数: {vars(args)}")
    try:
        return COMMANDS[args.command](args)
    except Exception as e:
        return _handle_error(e)


if __name__ == "__main__":
    sys.exit(main())
