"""Command-line surface: exit codes, report envelopes, determinism.

Most tests drive ``main(argv)`` in-process and parse captured stdout.
The reports must be machine-stable: same argv, same bytes.
"""

import json
import subprocess
import sys

import pytest

from toposkit.cli import main

DEMO = """
category one
  objects *

category diamond
  objects bot a b top
  morphisms
    bot.a : bot -> a
    bot.b : bot -> b
    a.top : a -> top
    b.top : b -> top
    bot.top : bot -> top

site disc on diamond
  covers
    top <- a.top b.top
    bot <-

handle fin = presheaves on one bound 3

functor wedge from diamond into fin
  objects
    bot =
    a = x
    b = y
    top = z
  maps
    a.top : x -> z
    b.top : y -> z

functor constpt from diamond into fin
  objects
    bot = p
    a = p
    b = p
    top = p
  maps
    bot.a : p -> p
    bot.b : p -> p
    a.top : p -> p
    b.top : p -> p
    bot.top : p -> p

presheaf wedgeish on diamond
  values
    bot = w0 w1
    a = x
    b = y
    top = z
  actions
    bot.a : x -> w0
    bot.b : y -> w0
    a.top : z -> x
    b.top : z -> y
    bot.top : z -> w0
"""

ARROW = """
category arrow
  objects s t
  morphisms
    s.t : s -> t

category one
  objects *

handle fin = presheaves on one bound 3

functor doubled from arrow into fin
  objects
    s = x0 x1
    t = y
  maps
    s.t : x0 -> y
    s.t : x1 -> y

presheaf hs on arrow
  values
    s = e
    t =

presheaf pt on arrow
  values
    s = e
    t = e
  actions
    s.t : e -> e

presheaf zee on one
  values
    * = z0 z1

site triv on arrow
  covers
    s <-

site onepoint on one
  covers
    * <-
"""


@pytest.fixture(scope="module")
def demo_ws(tmp_path_factory):
    p = tmp_path_factory.mktemp("ws") / "demo.ws"
    p.write_text(DEMO)
    return str(p)


@pytest.fixture(scope="module")
def arrow_ws(tmp_path_factory):
    p = tmp_path_factory.mktemp("ws") / "arrow.ws"
    p.write_text(ARROW)
    return str(p)


def run_json(argv, capsys):
    code = main(argv + ["--report", "json"])
    payload = json.loads(capsys.readouterr().out)
    return code, payload


# -- envelope -----------------------------------------------------------------


def test_envelope_shape(demo_ws, capsys):
    code, payload = run_json(["validate", "--input", demo_ws], capsys)
    assert code == 0
    assert payload["schema"] == "toposkit-report/1"
    assert payload["command"] == "validate"
    assert payload["failed"] is False
    assert set(payload) == {"schema", "command", "seed", "budget", "failed", "result"}
    kinds = {e["kind"] for e in payload["result"]["entities"]}
    assert kinds == {"category", "presheaf", "site", "handle", "functor"}


def test_validate_reports_parse_errors_instead_of_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.ws"
    bad.write_text("presheaf P on nowhere\n  values\n    x = a\n")
    code, payload = run_json(["validate", "--input", str(bad)], capsys)
    assert code == 1
    assert payload["failed"] is True
    errs = payload["result"]["errors"]
    assert errs and errs[0]["line"] == 1 and "nowhere" in errs[0]["reason"]


def test_other_commands_treat_parse_errors_as_usage(tmp_path, capsys):
    bad = tmp_path / "bad.ws"
    bad.write_text("category c\n  objects x\n  morphisms\n    f : x -> missing\n")
    code = main(["flat", "--input", str(bad), "p", "--report", "json"])
    capsys.readouterr()
    assert code == 2


def test_missing_input_is_usage_error(capsys):
    code = main(["flat", "p", "--report", "json"])
    capsys.readouterr()
    assert code == 2


def test_missing_workspace_file_is_usage_error(capsys):
    code = main(["validate", "--input", "/no/such/file.ws"])
    capsys.readouterr()
    assert code == 2


def test_unknown_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    capsys.readouterr()
    assert exc.value.code == 2


def test_undeclared_entity_is_usage_error(demo_ws, capsys):
    code = main(["flat", "--input", demo_ws, "ghost", "--report", "json"])
    capsys.readouterr()
    assert code == 2


# -- verdict commands ---------------------------------------------------------


def test_flat_rejects_the_wedge(demo_ws, capsys):
    code, payload = run_json(["flat", "--input", demo_ws, "wedge"], capsys)
    assert code == 1  # the wedge kills the binary product over top
    r = payload["result"]
    assert r["element_category_cofiltered"]["flat"] is False
    assert r["exactness_probe"]["verdict"] == "counterexample"
    assert r["exactness_probe"]["counterexample"] is not None


def test_flat_accepts_constant_point(demo_ws, capsys):
    code, payload = run_json(["flat", "--input", demo_ws, "constpt"], capsys)
    assert code == 0
    r = payload["result"]
    assert r["element_category_cofiltered"]["flat"] is True
    assert r["exactness_probe"]["verdict"] == "verified-up-to-budget"


def test_flat_rejects_doubled_stalk(arrow_ws, capsys):
    code, payload = run_json(["flat", "--input", arrow_ws, "doubled"], capsys)
    assert code == 1
    assert payload["result"]["element_category_cofiltered"]["flat"] is False


def test_continuous_flags_constant_point_at_the_empty_cover(demo_ws, capsys):
    code, payload = run_json(
        ["continuous", "--input", demo_ws, "constpt", "disc"], capsys
    )
    assert code == 1
    r = payload["result"]
    assert r["ok"] is False
    assert any(f["object"] == "bot" for f in r["failures"])


def test_continuous_accepts_the_wedge(demo_ws, capsys):
    code, payload = run_json(["continuous", "--input", demo_ws, "wedge", "disc"], capsys)
    assert code == 0
    assert payload["result"]["ok"] is True
    assert payload["result"]["covers_checked"] >= 2


def test_continuous_rejects_doubled_on_the_empty_cover(arrow_ws, capsys):
    # p(s) has two points, so the image of the empty cover cannot be epi
    code, payload = run_json(
        ["continuous", "--input", arrow_ws, "doubled", "triv"], capsys
    )
    assert code == 1
    assert any(f["object"] == "s" for f in payload["result"]["failures"])


def test_continuous_site_base_mismatch_is_usage_error(arrow_ws, capsys):
    code = main(
        ["continuous", "--input", arrow_ws, "doubled", "onepoint", "--report", "json"]
    )
    capsys.readouterr()
    assert code == 2


# -- construction commands ----------------------------------------------------


def test_sheafify_fixes_the_wedgeish_presheaf(demo_ws, capsys):
    code, payload = run_json(
        ["sheafify", "--input", demo_ws, "wedgeish", "disc"], capsys
    )
    assert code == 0
    r = payload["result"]
    assert r["was_sheaf"] is False
    assert r["result_is_sheaf"] is True
    # the empty cover at bot forces the sheaf value there to a point
    assert len(r["sheaf"]["values"]["bot"]) == 1


def test_sheafify_is_idle_on_a_sheaf(arrow_ws, capsys):
    code, payload = run_json(["sheafify", "--input", arrow_ws, "hs", "triv"], capsys)
    assert code == 0
    r = payload["result"]
    assert r["was_sheaf"] is True and r["unit_is_iso"] is True


def test_extend_reports_values_and_cocone(arrow_ws, capsys):
    code, payload = run_json(["extend", "--input", arrow_ws, "doubled", "pt"], capsys)
    assert code == 0
    r = payload["result"]
    assert r["value_validates"] is True
    assert r["value"]["values"]  # a table per base object of the handle
    assert r["cocone"]  # one leg per element of the input presheaf


def test_adjoint_tables_cover_every_base_object(arrow_ws, capsys):
    code, payload = run_json(["adjoint", "--input", arrow_ws, "doubled", "zee"], capsys)
    assert code == 0
    r = payload["result"]
    assert set(r["tables"]["values"]) == {"s", "t"}
    assert r["tables_validate"] is True
    # h_p(zee)(X) is the hom-set from p(X) to zee, so its size is 2^|p(X)|
    assert len(r["tables"]["values"]["s"]) == 4
    assert len(r["tables"]["values"]["t"]) == 2


def test_epsilon_object_filter(demo_ws, capsys):
    code, payload = run_json(
        ["epsilon", "--input", demo_ws, "disc", "--object", "top"], capsys
    )
    assert code == 0
    assert set(payload["result"]["objects"]) == {"top"}
    assert payload["result"]["objects"]["top"]["is_sheaf"] is True


def test_epsilon_unknown_object_is_usage_error(demo_ws, capsys):
    code = main(
        ["epsilon", "--input", demo_ws, "disc", "--object", "side", "--report", "json"]
    )
    capsys.readouterr()
    assert code == 2


def test_canonical_topology_on_the_arrow(arrow_ws, capsys):
    code, payload = run_json(
        ["canonical-topology", "--input", arrow_ws, "arrow"], capsys
    )
    assert code == 0
    r = payload["result"]
    assert r["subcanonical"]["value"] is True
    assert [] in r["covers"]["s"]  # s is strictly initial


# -- suites and output --------------------------------------------------------


def test_suite_runs_without_workspace(capsys):
    code, payload = run_json(["suite", "II", "--seed", "0", "--budget", "small"], capsys)
    assert code == 0
    assert payload["result"]["verdict"] == "pass"


def test_suite_output_is_deterministic(capsys):
    main(["suite", "III", "--seed", "1", "--budget", "small", "--report", "json"])
    first = capsys.readouterr().out
    main(["suite", "III", "--seed", "1", "--budget", "small", "--report", "json"])
    second = capsys.readouterr().out
    assert first == second


def test_out_writes_both_report_files(demo_ws, tmp_path, capsys):
    out = tmp_path / "reports"
    code = main(["validate", "--input", demo_ws, "--out", str(out), "--report", "both"])
    capsys.readouterr()
    assert code == 0
    data = json.loads((out / "validate.json").read_text())
    assert data["schema"] == "toposkit-report/1"
    assert "schema: toposkit-report/1" in (out / "validate.txt").read_text()


def test_module_entry_point(demo_ws):
    proc = subprocess.run(
        [sys.executable, "-m", "toposkit.cli", "validate", "--input", demo_ws,
         "--report", "json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["failed"] is False
