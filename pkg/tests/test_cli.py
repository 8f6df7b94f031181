import json

import pytest

from docforge.cli import main


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def vocab(tmp_path):
    path = tmp_path / "vocab.json"
    path.write_text(json.dumps({"fields": ["class", "name", "menu", "nm"], "classes": ["memo"],
                                "prompts": []}))
    return path


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_encode_class(tmp_path, capsys, vocab):
    tree = _write(tmp_path / "t.json", '{"class":"memo"}')
    code, out, _ = _run(capsys, "encode", "--in", tree, "--vocab", vocab)
    assert code == 0 and out == "[START_class][memo][END_class]\n"
    seq = _write(tmp_path / "s.txt", out)
    code, out, err = _run(capsys, "decode", "--in", seq, "--vocab", vocab)
    assert code == 0 and json.loads(out) == {"class": "memo"} and err == ""


def test_decode_recovery_strict(tmp_path, capsys, vocab):
    seq = _write(tmp_path / "s.txt", "[START_name] John\n")
    code, out, err = _run(capsys, "decode", "--in", seq, "--vocab", vocab)
    assert code == 0 and json.loads(out) == {}
    assert json.loads(err)["events"][0]["kind"] == "LostField"
    code, out, _ = _run(capsys, "decode", "--in", seq, "--vocab", vocab, "--strict")
    assert code == 4 and json.loads(out) == {}


@pytest.mark.parametrize("tree_text,vocab_text", [
    ('{"class":', None),
    ('{"a":null}', None),
    ('{"other":"x"}', None),
    ('{"class":"memo"}', "[1, 2]"),
    ('{"class":"memo"}', '{"fields": "class"}'),
])
def test_encode_bad_input(tmp_path, capsys, vocab, tree_text, vocab_text):
    tree = _write(tmp_path / "t.json", tree_text)
    if vocab_text is not None:
        vocab = _write(tmp_path / "v2.json", vocab_text)
    code, out, err = _run(capsys, "encode", "--in", tree, "--vocab", vocab)
    assert code == 2 and out == "" and err


def test_missing_input_file(tmp_path, capsys, vocab):
    code, _, err = _run(capsys, "decode", "--in", tmp_path / "nope.txt", "--vocab", vocab)
    assert code == 2 and "nope.txt" in err


def _jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_score_nted_identical(tmp_path, capsys):
    recs = [{"id": f"s{i}", "parse": {"menu": [{"nm": "A"}, {"nm": str(i)}]}} for i in range(3)]
    gt = _jsonl(tmp_path / "gt.jsonl", recs)
    code, out, _ = _run(capsys, "score", "--metric", "nted", "--gt", gt, "--pred", gt)
    report = json.loads(out)
    assert code == 0 and report["mean"] == 0.0 and report["n"] == 3
    assert set(report) == {"metric", "mean", "n", "samples"}


def test_score_anls_exact(tmp_path, capsys):
    gt = _jsonl(tmp_path / "gt.jsonl", [{"id": 1, "answers": ["Hello", "hi"]},
                                         {"id": 2, "answers": ["x"]}])
    pred = _jsonl(tmp_path / "p.jsonl", [{"id": 2, "answer": "x"}, {"id": 1, "answer": "hello"}])
    out_path = tmp_path / "report.json"
    code, out, _ = _run(capsys, "score", "--metric", "anls", "--gt", gt, "--pred", pred,
                        "--out", out_path)
    assert code == 0 and out == ""
    assert json.loads(out_path.read_text())["mean"] == 1.0


def test_score_anls_tau(tmp_path, capsys):
    gt = _jsonl(tmp_path / "gt.jsonl", [{"id": "q", "answers": ["hello"]}])
    pred = _jsonl(tmp_path / "p.jsonl", [{"id": "q", "answer": "helo"}])
    _, out, _ = _run(capsys, "score", "--metric", "anls", "--gt", gt, "--pred", pred)
    assert json.loads(out)["mean"] == pytest.approx(0.8)
    _, out, _ = _run(capsys, "score", "--metric", "anls", "--gt", gt, "--pred", pred, "--tau", "0.9")
    assert json.loads(out)["mean"] == 0.0


def test_score_accuracy_fixture(tmp_path, capsys):
    classes = ["memo", "letter", "email", "memo"]
    predicted = ["memo", "letter", "email", "letter"]
    gt = _jsonl(tmp_path / "gt.jsonl", [{"id": i, "parse": {"class": c}} for i, c in enumerate(classes)])
    pred = _jsonl(tmp_path / "p.jsonl", [{"id": i, "parse": {"class": c}} for i, c in enumerate(predicted)])
    code, out, _ = _run(capsys, "score", "--metric", "accuracy", "--gt", gt, "--pred", pred)
    assert code == 0 and json.loads(out)["mean"] == 0.75


def test_score_misaligned_ids(tmp_path, capsys):
    gt = _jsonl(tmp_path / "gt.jsonl", [{"id": "a", "parse": {}}, {"id": "b", "parse": {}}])
    pred = _jsonl(tmp_path / "p.jsonl", [{"id": "a", "parse": {}}])
    code, out, err = _run(capsys, "score", "--metric", "nted", "--gt", gt, "--pred", pred)
    assert code == 5 and out == ""
    assert json.loads(err.splitlines()[0])["missing_ids"] == ["b"]


@pytest.mark.parametrize("records", [
    [{"id": "a"}],
    [{"parse": {}}],
    [{"id": "a", "parse": []}],
    [{"id": "a", "parse": {}}, {"id": "a", "parse": {}}],
    [{"id": "a", "parse": {"x": None}}],
])
def test_score_schema_errors(tmp_path, capsys, records):
    gt = _jsonl(tmp_path / "gt.jsonl", records)
    code, _, err = _run(capsys, "score", "--metric", "nted", "--gt", gt, "--pred", gt)
    assert code == 2 and err


def test_generate_twice_identical(tmp_path, capsys):
    cfg = _write(tmp_path / "cfg.toml", "width = [200, 200]\nheight = [160, 160]\n")
    outputs = []
    for name in ("a", "b"):
        code, out, _ = _run(capsys, "generate", cfg, "--count", 4, "--seed", 7,
                            "--out", tmp_path / name)
        assert code == 0
        summary = json.loads(out)
        assert summary["images"] == 4 and summary["words"] > 0 and "seconds" in summary
        outputs.append((tmp_path / name / "metadata.jsonl").read_bytes())
    assert outputs[0] == outputs[1]
    code, out, _ = _run(capsys, "validate", tmp_path / "a" / "metadata.jsonl", "--strict")
    assert code == 0 and json.loads(out)["ok"]


def test_generate_overrides_and_threads(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DOCFORGE_THREADS", "2")
    code, _, _ = _run(capsys, "generate", "--count", 2, "--out", tmp_path / "o",
                      "--set", "width=[128,128]", "--set", "height=[96,96]")
    assert code == 0
    from PIL import Image
    with Image.open(tmp_path / "o" / "images" / "00000001.png") as img:
        assert img.size == (128, 96)
    monkeypatch.setenv("DOCFORGE_THREADS", "many")
    code, _, err = _run(capsys, "generate", "--count", 1, "--out", tmp_path / "p")
    assert code == 2 and "DOCFORGE_THREADS" in err


def test_generate_count_zero(tmp_path, capsys):
    code, out, _ = _run(capsys, "generate", "--count", 0, "--out", tmp_path / "z")
    assert code == 0 and json.loads(out)["images"] == 0
    assert (tmp_path / "z" / "metadata.jsonl").read_text() == ""


@pytest.mark.parametrize("extra", [
    ["cfg-missing.toml"], ["--set", "colour=1"], ["--set", "width=[10,10]"],
    ["--set", "fallbacks=false"],
])
def test_generate_config_errors(tmp_path, capsys, extra):
    code, _, err = _run(capsys, "generate", "--count", 1, "--out", tmp_path / "o", *extra)
    assert code == 2 and err


def test_generate_error_exit_3(tmp_path, capsys):
    blocker = _write(tmp_path / "o", "a file where the output directory should go")
    code, _, err = _run(capsys, "generate", "--count", 1, "--out", blocker)
    assert code == 2 and err
    (tmp_path / "d" / "images" / "00000000.png").mkdir(parents=True)
    code, _, err = _run(capsys, "generate", "--count", 1, "--out", tmp_path / "d")
    assert code == 3 and "sample 0" in err


def test_validate_reports_violations(tmp_path, capsys):
    rec = {"file_name": "x.png", "ground_truth": {"gt_parse": {"text_sequence": "a"}},
           "words": [{"text": "a", "quad": [[-1, 5], [2, 1], [2, 2], [1, 2]]}]}
    path = _jsonl(tmp_path / "metadata.jsonl", [rec])
    code, out, _ = _run(capsys, "validate", path)
    assert code == 2 and json.loads(out)["violations"][0]["kind"] == "bounds"


@pytest.mark.parametrize("argv", [
    ["frobnicate"], ["encode", "--in", "x"], ["score", "--metric", "bleu", "--gt", "a", "--pred", "b"],
    ["decode", "--in", "x", "--vocab", "v", "--bogus"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


@pytest.mark.parametrize("command", ["generate", "encode", "decode", "score", "validate"])
def test_help(capsys, command):
    with pytest.raises(SystemExit) as info:
        main([command, "--help"])
    assert info.value.code == 0
    assert "usage" in capsys.readouterr().out
