import os
import sys
import time

import pytest
from hypothesis import given, settings, strategies as st

from semiforge.executor import (
    ExecStatus,
    InterpreterMissing,
    Invocation,
    ResourceLimits,
    execute,
    normalize_output,
    outputs_match,
    parse_args_literal,
    resolve_interpreter,
    wrap_call_based,
)

FAST = ResourceLimits(wall_timeout=5.0)


def test_stdin_round_trip():
    result = execute("print(int(input()) * 2)", Invocation.stdin("21"), FAST)
    assert result.status is ExecStatus.OK
    assert result.ok
    assert normalize_output(result.stdout) == "42"
    assert result.returncode == 0


def test_multi_line_stdin():
    code = "n = int(input())\nprint(sum(int(input()) for _ in range(n)))"
    result = execute(code, Invocation.stdin("3\n1\n2\n3"), FAST)
    assert result.ok
    assert normalize_output(result.stdout) == "6"


def test_call_based_tuple_args():
    code = "def add(a, b):\n    return a + b"
    result = execute(code, Invocation.call("add", "(2, 3)"), FAST)
    assert result.ok
    assert normalize_output(result.stdout) == "5"


def test_call_based_single_arg():
    code = "def shout(text):\n    return text.upper()"
    result = execute(code, Invocation.call("shout", "'hi'"), FAST)
    assert result.ok
    assert normalize_output(result.stdout) == "'HI'"  # repr of the return value


def test_call_based_none_prints_nothing():
    code = "def quiet(x):\n    pass"
    result = execute(code, Invocation.call("quiet", "(1,)"), FAST)
    assert result.ok
    assert normalize_output(result.stdout) == ""


def test_runtime_error_captured():
    result = execute("raise ValueError('boom')", Invocation.stdin(""), FAST)
    assert result.status is ExecStatus.RUNTIME_ERROR
    assert not result.ok
    assert result.returncode != 0
    assert "boom" in result.stderr


def test_timeout_kills_spin_loop():
    started = time.monotonic()
    result = execute("while True:\n    pass", Invocation.stdin(""), ResourceLimits(wall_timeout=1.0))
    elapsed = time.monotonic() - started
    assert result.status is ExecStatus.TIMEOUT
    assert elapsed <= 2.0
    assert result.duration <= 2.0


def test_output_overflow_detected():
    code = "print('x' * 2_000_000)"
    result = execute(code, Invocation.stdin(""), ResourceLimits(output_bytes=10_000))
    assert result.status is ExecStatus.OUTPUT_OVERFLOW


def test_memory_limit_enforced():
    code = "data = bytearray(1024 * 1024 * 1024)\nprint(len(data))"
    result = execute(code, Invocation.stdin(""), ResourceLimits(memory_bytes=256 * 1024 * 1024))
    assert result.status is ExecStatus.RUNTIME_ERROR


def test_deterministic_runs_identical():
    code = "print(sorted([3, 1, 2]))"
    first = execute(code, Invocation.stdin(""), FAST)
    second = execute(code, Invocation.stdin(""), FAST)
    assert first.status == second.status
    assert normalize_output(first.stdout) == normalize_output(second.stdout)


def test_workdir_removed_after_run():
    result = execute("import os\nprint(os.getcwd())", Invocation.stdin(""), FAST)
    assert result.ok
    workdir = normalize_output(result.stdout)
    assert not os.path.exists(workdir)


def test_child_env_has_no_credentials(monkeypatch):
    monkeypatch.setenv("SEMIFORGE_API_KEY", "sk-secret")
    code = "import os\nprint(os.environ.get('SEMIFORGE_API_KEY'))"
    result = execute(code, Invocation.stdin(""), FAST)
    assert result.ok
    assert normalize_output(result.stdout) == "None"


def test_invocation_validation():
    with pytest.raises(ValueError):
        Invocation(mode="socket", payload="")
    with pytest.raises(ValueError):
        Invocation.call("not an identifier", "(1,)")
    with pytest.raises(ValueError):
        Invocation(mode="call", payload="(1,)", function_name=None)


def test_limit_validation():
    for kwargs in ({"wall_timeout": 0}, {"memory_bytes": -1}, {"output_bytes": 0}):
        with pytest.raises(ValueError):
            ResourceLimits(**kwargs)


def test_resolve_interpreter():
    assert resolve_interpreter(None) == sys.executable
    assert resolve_interpreter(sys.executable) == sys.executable
    with pytest.raises(InterpreterMissing):
        resolve_interpreter("definitely-not-an-interpreter-zz")


def test_wrap_call_based_substitution():
    wrapped = wrap_call_based("def f(x):\n    return x", "f", "(1, 2)")
    assert "def f(x):" in wrapped
    assert "{{" not in wrapped
    assert repr("(1, 2)") in wrapped


def test_parse_args_literal():
    assert parse_args_literal("(1, 2)") == (1, 2)
    assert parse_args_literal("[1, 2]") == [1, 2]
    assert parse_args_literal("'text'") == "text"
    with pytest.raises(ValueError):
        parse_args_literal("os.system('true')")


def test_normalize_output_rules():
    assert normalize_output("a  \nb\n\n\n") == "a\nb"
    assert normalize_output("") == ""
    assert normalize_output("x") == "x"
    assert normalize_output("a\r\nb\r\n") == "a\nb"


def test_outputs_match_examples():
    assert outputs_match("42\n", "42")
    assert outputs_match("a \nb  ", "a\nb")
    assert not outputs_match("a\nb", "a b")
    assert not outputs_match("1", "2")


plain_lines = st.lists(
    st.text(
        alphabet=st.characters(min_codepoint=33, max_codepoint=126), min_size=0, max_size=12
    ),
    max_size=6,
)


@given(plain_lines, st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3))
@settings(max_examples=60)
def test_outputs_match_ignores_trailing_whitespace(lines, pad, extra_newlines):
    text = "\n".join(lines)
    noisy = "\n".join(line + " " * pad for line in lines) + "\n" * extra_newlines
    assert outputs_match(noisy, text)


@given(plain_lines)
@settings(max_examples=60)
def test_normalize_idempotent(lines):
    text = "\n".join(lines)
    assert normalize_output(normalize_output(text)) == normalize_output(text)
