import io
import json
import os

import pytest

from conftest import CORPUS
from minip4.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def corpus(name):
    return os.path.join(CORPUS, name)


def test_check_ok_and_invalid(tmp_path):
    assert run("check", corpus("nested_if.mp4l"))[0] == 0
    bad = tmp_path / "bad.mp4l"
    bad.write_text("control c(inout bit<8> x) { apply { x = y; } }")
    code, text = run("check", str(bad))
    assert code == 1 and "y" in text


def test_usage_errors():
    assert run("check", "/no/such/file.mp4l")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("validate", corpus("nested_if.mp4l"), "--bug", "NOPE")[0] == 2
    assert run("validate", corpus("nested_if.mp4l"), "--undefined-policy", "pattern:zz")[0] == 2
    assert run("validate")[0] == 2  # neither file nor seed


def test_validate_clean_corpus_program():
    code, text = run("validate", corpus("hoist_ternary.mp4l"))
    assert code == 0 and "no findings" in text


def test_validate_names_the_toggled_pass():
    code, text = run("validate", corpus("exit_copyout.mp4l"), "--bug", "RAP-EXIT-SKIP-COPYOUT")
    assert code == 1
    assert "Semantic in RemoveActionParams" in text


def test_global_flags_work_before_or_after_the_subcommand():
    a = run("--bug", "RAP-EXIT-SKIP-COPYOUT", "validate", corpus("exit_copyout.mp4l"))
    b = run("validate", corpus("exit_copyout.mp4l"), "--bug", "RAP-EXIT-SKIP-COPYOUT")
    assert a == b


def test_invalid_header_copy_is_only_a_warning_in_aware_mode():
    args = ("validate", corpus("invalid_header_copy.mp4l"), "--bug", "CP-INVALID-HDR")
    code, text = run(*args)
    assert code == 0 and text.startswith("warning: Unstable in CopyProp")
    code, text = run(*args, "--taint-mode", "strict")
    assert code == 1 and "Semantic in CopyProp" in text


def test_json_findings():
    code, text = run("validate", corpus("slice_store.mp4l"), "--bug", "DSE-SLICE-ALIAS", "--json")
    assert code == 1
    (rec,) = [json.loads(line) for line in text.splitlines()]
    assert rec["kind"] == "Semantic" and rec["pass"] == "ElimDeadStores"


def test_mbt_command_writes_stf(tmp_path):
    code, text = run("mbt", corpus("table_assign.mp4l"), "--stf-dir", str(tmp_path))
    assert code == 0 and "3 path(s)" in text
    stf = (tmp_path / "table_assign.stf").read_text()
    assert stf.count("packet ") == 3
    code, _ = run("mbt", corpus("exit_copyout.mp4l"), "--bug", "RAP-EXIT-SKIP-COPYOUT")
    assert code == 1


def test_generate_files(tmp_path):
    assert run("generate", "--seed", "5", "--count", "3", "--out-dir", str(tmp_path))[0] == 0
    assert sorted(os.listdir(tmp_path)) == ["gen_5.mp4l", "gen_6.mp4l", "gen_7.mp4l"]
    for f in tmp_path.iterdir():
        assert run("check", str(f))[0] == 0
    _, text = run("generate", "--seed", "6")
    assert text == (tmp_path / "gen_6.mp4l").read_text()


def test_generate_honours_config(tmp_path):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("weight.ternary = 0\nweight.if = 0\n")
    _, text = run("generate", "--seed", "1", "--count", "20", "--config", str(cfg))
    assert " ? " not in text and "if (" not in text


def test_compile_dumps_every_pass(tmp_path):
    code, text = run("compile", corpus("hoist_ternary.mp4l"), "--dump-passes", str(tmp_path))
    assert code == 0 and "control" in text
    dumps = sorted(os.listdir(tmp_path))
    assert dumps and dumps[0].startswith("00")
    assert run("compile", corpus("hoist_ternary.mp4l"), "--passes", "Nope")[0] == 2


def test_dump_semantics():
    code, text = run("check", corpus("table_assign.mp4l"), "--dump-semantics")
    assert code == 0 and "t_table_key_0" in text
    code, text = run("check", corpus("table_assign.mp4l"), "--dump-semantics", "smt")
    assert "(declare-fun |t_table_key_0|" in text


def _campaign(tmp_path, name, *extra):
    d = tmp_path / name
    code, _ = run("campaign", "--count", "12", "--seed", "100", "--out-dir", str(d), *extra)
    return code, (d / "findings.jsonl").read_bytes(), json.loads((d / "summary.json").read_text())


def test_campaign_is_deterministic_across_runs_and_workers(tmp_path):
    c1, a, s1 = _campaign(tmp_path, "a", "--bug", "all", "--workers", "1")
    c2, b, _ = _campaign(tmp_path, "b", "--bug", "all", "--workers", "1")
    c3, c, _ = _campaign(tmp_path, "c", "--bug", "all", "--workers", "2")
    assert a == b == c and a
    assert c1 == c2 == c3
    assert s1["seeds"] == {"first": 100, "last": 111}
    assert set(s1["detection"]) >= {"SEO-MISS-TERNARY", "RAP-EXIT-SKIP-COPYOUT"}


def test_campaign_without_toggles_is_clean(tmp_path):
    code, data, summary = _campaign(tmp_path, "clean")
    assert code == 0 and data == b""
    assert summary["errors"] == [] and summary["totals"]["Semantic"] == 0


def test_campaign_exit_code_follows_detection(tmp_path):
    code, _, summary = _campaign(tmp_path, "seo", "--bug", "SEO-MISS-TERNARY", "--no-mbt")
    assert (code == 0) == (summary["detection"]["SEO-MISS-TERNARY"]["detecting"] > 0)


def test_campaign_findings_replay_with_validate(tmp_path):
    _, data, _ = _campaign(tmp_path, "r", "--bug", "all", "--no-mbt")
    recs = [json.loads(line) for line in data.decode().splitlines()]
    assert recs
    for rec in recs[:5]:
        code, text = run("validate", "--seed", str(rec["seed"]), "--bug", "all", "--json")
        again = [json.loads(line) for line in text.splitlines()]
        for r in again:
            r.pop("ms", None)
        rec = {k: v for k, v in rec.items() if k != "job"}
        assert rec in again


def test_campaign_bad_count(tmp_path):
    assert run("campaign", "--count", "0", "--out-dir", str(tmp_path))[0] == 2
