#!/usr/bin/env python3
"""インストールせずにリポジトリから CLI を実行するためのランチャー"""
import sys

from drsubmax.cli import main

sys.exit(main())
