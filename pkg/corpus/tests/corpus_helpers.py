import os
import shutil
import subprocess
import sys

import pytest

REPO = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
CORPUS = os.path.join(REPO, "corpus")
ASPECTS = os.path.join(REPO, "aspects")

CC = shutil.which("cc") or shutil.which("gcc")
STRICT_CFLAGS = ["-std=c99", "-Wall", "-Wextra", "-Werror", "-pedantic"]


def corpus_path(name):
    return os.path.join(CORPUS, name)


def aspect_path(name):
    return os.path.join(ASPECTS, name)


def weave_cli(args, cwd):
    """The corpus consumes the toolkit only through its CLI."""
    return subprocess.run([sys.executable, "-m", "aweave.cli", *args],
                          cwd=cwd, capture_output=True, text=True)


def compile_c(sources, out, flags=(), cwd=None):
    if CC is None:
        pytest.skip("no C compiler available")
    cmd = [CC, *STRICT_CFLAGS, *flags, "-o", out, *sources, "-lm"]
    proc = subprocess.run(cmd, cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, f"compile failed:\n{proc.stderr}"
    return out


def run_prog(binary, args=(), env=None, cwd=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    proc = subprocess.run([binary, *args], env=full_env, cwd=cwd,
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, f"{binary} failed:\n{proc.stderr}"
    return proc.stdout
