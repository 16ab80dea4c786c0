"""Command line contract: report lines, exit codes, file handling."""

import json

import numpy as np
import pytest

from finstoch import (
    Box,
    Kernel,
    ahspec_to_json,
    assignment_from_json,
    kernel_to_json,
    make_model,
    model_to_json,
    quantile_from_json,
    recompose,
    state_from_json,
    state_to_json,
)
from finstoch.cli import main
from support import (
    carrier,
    random_ahspec,
    random_assignment,
    random_kernel,
    random_state,
)


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out.splitlines(), captured.err


@pytest.fixture
def chain_files(tmp_path):
    """A three-box chain model and a state it recomposes exactly."""
    rng = np.random.default_rng(21)
    m = make_model(
        [Box("f1", (), ("X",)), Box("f2", ("X",), ("Y",)), Box("f3", ("Y",), ("Z",))]
    )
    bit = carrier("b", 2)
    asg = random_assignment(rng, m)
    p = recompose(m, asg)
    return (
        write(tmp_path, "model.json", model_to_json(m)),
        write(tmp_path, "state.json", state_to_json(p)),
    )


def test_validate_model_pass(chain_files, capsys):
    model, _ = chain_files
    code, out, err = run(capsys, ["validate-model", model])
    assert code == 0
    assert out == ["PASS model-valid"]
    assert err == ""


def test_validate_model_reports_violations(tmp_path, capsys):
    doc = {
        "wires": ["x"],
        "boxes": [
            {"name": "f", "in": [], "out": ["x"]},
            {"name": "g", "in": [], "out": ["x"]},
        ],
        "outputs": ["x"],
    }
    code, out, _ = run(capsys, ["validate-model", write(tmp_path, "bad.json", doc)])
    assert code == 1
    assert all(line.startswith("FAIL model-valid") for line in out)
    assert any("produced-once" in line for line in out)


def _triple_state(tmp_path):
    rng = np.random.default_rng(22)
    w = rng.uniform(0.2, 1.0, 2)
    w /= w.sum()
    fx = rng.uniform(0.05, 1.0, (2, 3))
    fy = rng.uniform(0.05, 1.0, (2, 2))
    fx /= fx.sum(axis=1, keepdims=True)
    fy /= fy.sum(axis=1, keepdims=True)
    arr = np.einsum("w,wx,wy->xyw", w, fx, fy)
    doc = {
        "dom": [],
        "cod": [
            {"label": "x", "elements": ["0", "1", "2"]},
            {"label": "y", "elements": ["0", "1"]},
            {"label": "w", "elements": ["0", "1"]},
        ],
        "rows": [arr.ravel().tolist()],
        "wire_names": ["x", "y", "w"],
    }
    return write(tmp_path, "triple.json", doc)


def test_check_ci_pass_and_fail(tmp_path, capsys):
    state = _triple_state(tmp_path)
    code, out, _ = run(capsys, ["check-ci", state, "--x", "x", "--y", "y", "--given", "w"])
    assert code == 0
    assert len(out) == 1 and out[0].startswith("PASS ci x⊥y|w residual=")
    code, out, _ = run(capsys, ["check-ci", state, "--x", "x", "--y", "w"])
    assert code == 1
    assert out[0].startswith("FAIL ci x⊥w residual=")


def test_check_ci_unknown_wire_is_an_input_error(tmp_path, capsys):
    state = _triple_state(tmp_path)
    code, out, err = run(capsys, ["check-ci", state, "--x", "nope", "--y", "y"])
    assert code == 2
    assert out == []
    assert err.startswith("error:") and "triple.json" in err


def test_check_markov_default_runs_three_checks(chain_files, capsys):
    model, state = chain_files
    code, out, _ = run(capsys, ["check-markov", state, model])
    assert code == 0
    assert [line.split()[1] for line in out] == [
        "local-markov",
        "ordered-markov",
        "compatible",
    ]
    assert all(line.startswith("PASS") and "residual=" in line for line in out)


def test_check_markov_single_property_flags(chain_files, capsys):
    model, state = chain_files
    for flag, name in (("--local", "local-markov"), ("--ordered", "ordered-markov")):
        code, out, _ = run(capsys, ["check-markov", state, model, flag])
        assert code == 0
        assert len(out) == 1 and out[0].startswith(f"PASS {name}")
    with pytest.raises(SystemExit):
        main(["check-markov", state, model, "--local", "--ordered"])


def test_check_markov_detects_incompatible_states(chain_files, tmp_path, capsys):
    model, _ = chain_files
    arr = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            arr[x, y, x] = 0.25
    doc = {
        "dom": [],
        "cod": [{"label": "b", "elements": ["0", "1"]}] * 3,
        "rows": [arr.ravel().tolist()],
        "wire_names": ["X", "Y", "Z"],
    }
    state = write(tmp_path, "coupled.json", doc)
    code, out, _ = run(capsys, ["check-markov", state, model])
    assert code == 1
    assert all(line.startswith("FAIL") for line in out)


def test_check_markov_timing_file(chain_files, tmp_path, capsys):
    model, state = chain_files
    good = write(tmp_path, "t.json", {"f1": 1, "f2": 5, "f3": 9})
    code, out, _ = run(capsys, ["check-markov", state, model, "--timing", good])
    assert code == 0
    bad = write(tmp_path, "bad_t.json", {"f1": 1, "f2": 1, "f3": 2})
    code, out, err = run(capsys, ["check-markov", state, model, "--timing", bad])
    assert code == 2
    assert "bad_t.json" in err


def test_wire_mismatch_names_both_files(chain_files, tmp_path, capsys):
    model, state = chain_files
    doc = json.loads((tmp_path / "state.json").read_text())
    doc["wire_names"] = ["X", "Y", "Q"]
    renamed = write(tmp_path, "renamed.json", doc)
    code, _, err = run(capsys, ["check-markov", renamed, model])
    assert code == 2
    assert "renamed.json" in err and "model.json" in err and "Q" in err


def test_factorize_writes_a_loadable_assignment(chain_files, tmp_path, capsys):
    model, state = chain_files
    out_path = tmp_path / "asg.json"
    code, out, _ = run(capsys, ["factorize", state, model, "-o", str(out_path)])
    assert code == 0
    assert out[0].startswith("PASS factorize-recompose residual=")
    asg = assignment_from_json(json.loads(out_path.read_text()))
    assert set(asg.kernels) == {"f1", "f2", "f3"}


def test_build_ah_writes_the_state(tmp_path, capsys):
    spec = write(
        tmp_path, "spec.json", ahspec_to_json(random_ahspec(np.random.default_rng(23), 2, hi=2))
    )
    out_path = tmp_path / "grid.json"
    code, out, _ = run(capsys, ["build-ah", spec, "-o", str(out_path)])
    assert code == 0
    assert out == ["PASS build-ah 4 wires"]
    p = state_from_json(json.loads(out_path.read_text()))
    assert sorted(p.wire_names) == ["S[1,1]", "S[1,2]", "S[2,1]", "S[2,2]"]
    code, out, _ = run(
        capsys, ["build-ah", spec, "--expose-latents", "-o", str(out_path)]
    )
    assert out == ["PASS build-ah 9 wires"]
    p = state_from_json(json.loads(out_path.read_text()))
    assert "T" in p.wire_names and "R[1]" in p.wire_names


def test_verify_ah_reports_three_lemma_lines(tmp_path, capsys):
    spec = write(
        tmp_path, "spec.json", ahspec_to_json(random_ahspec(np.random.default_rng(24), 2, hi=2))
    )
    code, out, _ = run(capsys, ["verify-ah", spec])
    assert code == 0
    assert [line.split()[1] for line in out] == [
        "ah-entries-given-tails",
        "ah-entry-vs-unrelated",
        "ah-tails-given-latent",
    ]
    rect = write(
        tmp_path,
        "rect.json",
        ahspec_to_json(random_ahspec(np.random.default_rng(25), 2, cols=3, hi=2)),
    )
    code, _, err = run(capsys, ["verify-ah", rect])
    assert code == 2 and "error:" in err


def _definetti_doc(n):
    rng = np.random.default_rng(26)
    a = carrier("a", 2)
    x = carrier("x", 2)
    from finstoch import build_definetti_joint

    j = build_definetti_joint(random_state(rng, a), random_kernel(rng, a, x), n)
    return state_to_json(j)


def test_check_exchangeable_sequence(tmp_path, capsys):
    state = write(tmp_path, "seq.json", _definetti_doc(3))
    code, out, _ = run(capsys, ["check-exchangeable", state])
    assert code == 0
    assert len(out) == 2
    assert out[0].startswith("PASS exchange sequence-swap(1,2) residual=")
    assert out[1].startswith("PASS exchange sequence-swap(2,3) residual=")


def test_check_exchangeable_grid_and_shape_argument(tmp_path, capsys):
    rng = np.random.default_rng(27)
    from finstoch import build_ah_joint

    j = build_ah_joint(random_ahspec(rng, 2, hi=2))
    state = write(tmp_path, "grid.json", state_to_json(j))
    code, out, _ = run(capsys, ["check-exchangeable", state, "--grid", "2x2"])
    assert code == 0
    assert [line.split()[1] for line in out] == [
        "exchange",
        "exchange",
    ] and [line.split()[2].split("(")[0] for line in out] == [
        "row-swap",
        "column-swap",
    ]
    code, _, err = run(capsys, ["check-exchangeable", state, "--grid", "3"])
    assert code == 2 and "does not match" in err
    code, _, err = run(capsys, ["check-exchangeable", state, "--grid", "wide"])
    assert code == 2 and "is not MxN" in err


def test_check_exchangeable_single_wire_has_no_checks(tmp_path, capsys):
    state = write(tmp_path, "one.json", _definetti_doc(1))
    code, out, _ = run(capsys, ["check-exchangeable", state])
    assert code == 0
    assert out == ["PASS (0 checks)"]


BUNDLED = [
    "independence1.json",
    "independence2.json",
    "independence3.json",
    "ah_ordered_markov.json",
]


@pytest.mark.parametrize("name", BUNDLED)
def test_replay_bundled_scripts_by_basename(name, capsys):
    code, out, _ = run(capsys, ["replay", name])
    assert code == 0
    assert out and all(line.startswith("PASS step[") for line in out)


def test_replay_explicit_path_and_failures(tmp_path, capsys):
    doc = {
        "symbols": ["x", "y", "z"],
        "axioms": [{"left": ["x", "y"], "right": ["z"]}],
        "steps": [
            {
                "rule": "decomposition",
                "premises": [0],
                "conclusion": {"left": ["x"], "right": ["z"]},
            },
            {
                "rule": "symmetry",
                "premises": [1],
                "conclusion": {"left": ["z"], "right": ["x"]},
            },
        ],
    }
    path = write(tmp_path, "proof.json", doc)
    code, out, _ = run(capsys, ["replay", path])
    assert code == 0
    assert len(out) == 2
    assert out[0] == "PASS step[0] decomposition x⊥z"
    doc["steps"][0]["conclusion"] = {"left": ["x"], "right": ["y"]}
    bad = write(tmp_path, "bad.json", doc)
    code, out, _ = run(capsys, ["replay", bad])
    assert code == 1
    assert len(out) == 1 and out[0].startswith("FAIL step[0]")


def test_replay_with_no_steps(tmp_path, capsys):
    doc = {"symbols": ["x", "y"], "axioms": [{"left": ["x"], "right": ["y"]}], "steps": []}
    code, out, _ = run(capsys, ["replay", write(tmp_path, "empty.json", doc)])
    assert code == 0
    assert out == ["PASS (0 checks)"]


def test_replay_missing_script(capsys):
    code, _, err = run(capsys, ["replay", "no_such_script.json"])
    assert code == 2
    assert "no_such_script.json" in err


def test_noise_outsource_reports_and_writes(tmp_path, capsys):
    rng = np.random.default_rng(28)
    f = random_kernel(rng, carrier("a", 3), carrier("y", 4), zero_frac=0.25)
    kf = write(tmp_path, "kernel.json", kernel_to_json(f))
    out_path = tmp_path / "parts.json"
    code, out, _ = run(capsys, ["noise-outsource", kf, "-o", str(out_path)])
    assert code == 0
    assert out[0].startswith("PASS quantile-pushforward residual=")
    assert out[1].startswith("PASS seed-mechanism-composite residual=")
    doc = json.loads(out_path.read_text())
    assert set(doc) == {"quantile", "seed", "mechanism"}
    qf = quantile_from_json(doc["quantile"])
    assert qf.order == ("0", "1", "2", "3")
    code, out, _ = run(capsys, ["noise-outsource", kf, "--order", "3,1,0,2"])
    assert code == 0
    code, _, err = run(capsys, ["noise-outsource", kf, "--order", "3,1"])
    assert code == 2


def test_check_cs_lines(tmp_path, capsys):
    rng = np.random.default_rng(29)
    a, y = carrier("a", 3), carrier("y", 2)
    p = Kernel.state([0.5, 0.5, 0.0], a)
    f = random_kernel(rng, a, y)
    rows = f.matrix.copy()
    rows[2] = [1.0, 0.0]
    g = Kernel((a,), (y,), rows)
    paths = [
        write(tmp_path, "p.json", kernel_to_json(p)),
        write(tmp_path, "f.json", kernel_to_json(f)),
        write(tmp_path, "g.json", kernel_to_json(g)),
    ]
    code, out, _ = run(capsys, ["check-cs", *paths])
    assert code == 0
    assert out[0].startswith("PASS cs-antecedent residual=0")
    assert out[1].startswith("PASS cs-as-equal residual=")
    rows = f.matrix.copy()
    rows[0] = rows[0][::-1]
    h = write(tmp_path, "h.json", kernel_to_json(Kernel((a,), (y,), rows)))
    code, out, _ = run(capsys, ["check-cs", paths[0], paths[1], h])
    assert code == 1
    assert out[0].startswith("FAIL cs-antecedent")


def test_unreadable_inputs_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, ["validate-model", str(tmp_path / "missing.json")])
    assert code == 2 and "missing.json" in err
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{ nope")
    code, _, err = run(capsys, ["validate-model", str(garbled)])
    assert code == 2 and "not valid JSON" in err


def test_atol_override(tmp_path, capsys, monkeypatch):
    state = _triple_state(tmp_path)
    monkeypatch.setenv("FINSTOCH_ATOL", "10")
    code, out, _ = run(capsys, ["check-ci", state, "--x", "x", "--y", "w"])
    assert code == 0 and out[0].startswith("PASS ci")
    monkeypatch.setenv("FINSTOCH_ATOL", "abc")
    code, _, err = run(capsys, ["check-ci", state, "--x", "x", "--y", "w"])
    assert code == 2 and "FINSTOCH_ATOL" in err


def test_output_is_deterministic(chain_files, capsys):
    model, state = chain_files
    first = run(capsys, ["check-markov", state, model])
    second = run(capsys, ["check-markov", state, model])
    assert first == second
