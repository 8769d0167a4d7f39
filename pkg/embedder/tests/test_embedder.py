import json
import subprocess
import sys

import pytest

from mocet_embedder.cli import main
from mocet_embedder.encoders import EmbedError, HashEncoder, resolve_encoder
from mocet_embedder.pipeline import EmbedJob, embed_texts

SAMPLE_TEXTS = [
    "acquire glassware from a retail supplier",
    "assemble the reaction apparatus",
    "calibrate the temperature controller",
    "prepare the buffer solution",
    "verify seal integrity before heating",
]


def _write_input(path, rows):
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def _sample_rows(n=20):
    rows = []
    for i in range(n):
        rows.append({
            "id": f"t{i:03d}",
            "text": f"{SAMPLE_TEXTS[i % len(SAMPLE_TEXTS)]} variant {i}",
            "outcome": i % 2,
            "category": "prep" if i % 3 else "acq",
        })
    return rows


class TestHashEncoder:
    def test_same_text_same_vector(self):
        encoder = HashEncoder(32)
        first, second = encoder.encode(["mix the solution", "mix the solution"])
        assert first == second

    def test_different_texts_differ(self):
        encoder = HashEncoder(32)
        a, b = encoder.encode(["mix the solution", "heat the mixture"])
        assert a != b

    def test_unit_norm_and_dimension(self):
        encoder = HashEncoder(48)
        [vector] = encoder.encode(["weigh the sample"])
        assert len(vector) == 48
        assert sum(v * v for v in vector) == pytest.approx(1.0)

    def test_resolver_understands_hash_spec(self):
        assert resolve_encoder("hash:16").dim == 16
        with pytest.raises(EmbedError, match="hash"):
            resolve_encoder("hash:sixteen")


class TestEmbedTexts:
    def test_order_and_count(self, tmp_path):
        rows = [{"id": f"r{i}", "text": f"step number {i}", "outcome": 1} for i in range(3)]
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, rows)
        count = embed_texts(EmbedJob(str(src), str(dst), model="hash:8"))
        assert count == 3
        written = [json.loads(line) for line in dst.read_text().splitlines()]
        assert [r["id"] for r in written] == ["r0", "r1", "r2"]

    def test_pass_through_fields_identical(self, tmp_path):
        rows = _sample_rows(6)
        rows[2]["text"] = "unicode text: café → powder"
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, rows)
        embed_texts(EmbedJob(str(src), str(dst), model="hash:8"))
        written = [json.loads(line) for line in dst.read_text().splitlines()]
        for row, out in zip(rows, written):
            assert out["id"] == row["id"]
            assert out["text"] == row["text"]
            assert out["outcome"] == row["outcome"]
            assert out["category"] == row["category"]

    def test_dimension_constant_across_records(self, tmp_path):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, _sample_rows(20))
        embed_texts(EmbedJob(str(src), str(dst), model="hash:24", batch_size=7))
        written = [json.loads(line) for line in dst.read_text().splitlines()]
        sample_dim = len(written[0]["embedding"])
        assert sample_dim == 24
        assert all(len(r["embedding"]) == sample_dim for r in written)

    def test_empty_text_rejected_with_line(self, tmp_path):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, [{"id": "a", "text": "fine"}, {"id": "b", "text": "   "}])
        with pytest.raises(EmbedError, match="line 2"):
            embed_texts(EmbedJob(str(src), str(dst), model="hash:8"))

    def test_malformed_line_rejected(self, tmp_path):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        src.write_text('{"id": "a", "text": "ok"}\nnot json\n')
        with pytest.raises(EmbedError, match="line 2"):
            embed_texts(EmbedJob(str(src), str(dst), model="hash:8"))

    def test_missing_id_rejected(self, tmp_path):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, [{"text": "no id"}])
        with pytest.raises(EmbedError, match="'id'"):
            embed_texts(EmbedJob(str(src), str(dst), model="hash:8"))

    def test_nine_significant_digit_serialization(self, tmp_path):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, [{"id": "a", "text": "check digits"}])
        embed_texts(EmbedJob(str(src), str(dst), model="hash:8"))
        [record] = [json.loads(line) for line in dst.read_text().splitlines()]
        for value in record["embedding"]:
            assert value == float(format(value, ".9g"))


class TestCli:
    def test_end_to_end(self, tmp_path, capsys):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        _write_input(src, _sample_rows(4))
        code = main(["--in", str(src), "--out", str(dst), "--model", "hash:8"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["records_written"] == 4

    def test_missing_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--in", "x.jsonl"])
        assert excinfo.value.code == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "usage"

    def test_bad_input_is_data_error(self, tmp_path, capsys):
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        src.write_text("not json\n")
        code = main(["--in", str(src), "--out", str(dst), "--model", "hash:8"])
        assert code == 1
        assert json.loads(capsys.readouterr().err.strip())["error"] == "data"


class TestIntegrationWithEngine:
    """The corpus line format is the contract between the two packages."""

    def test_twenty_line_sample_loads_and_reruns_identically(self, tmp_path):
        src = tmp_path / "texts.jsonl"
        _write_input(src, _sample_rows(20))
        outputs = []
        for name in ("first.jsonl", "second.jsonl"):
            dst = tmp_path / name
            count = embed_texts(EmbedJob(str(src), str(dst), model="hash:32"))
            assert count == 20
            outputs.append(dst.read_bytes())
        assert outputs[0] == outputs[1]

        result = subprocess.run(
            [sys.executable, "-m", "mocet", "inspect",
             "--corpus", str(tmp_path / "first.jsonl")],
            capture_output=True,
        )
        assert result.returncode == 0, result.stderr
        summary = json.loads(result.stdout)
        assert summary["items"] == 20
        assert summary["dim"] == 32
        assert summary["usable_for_estimation"] is True

    def test_scoring_runs_on_embedded_corpus(self, tmp_path):
        src, corpus = tmp_path / "texts.jsonl", tmp_path / "corpus.jsonl"
        _write_input(src, _sample_rows(20))
        embed_texts(EmbedJob(str(src), str(corpus), model="hash:16"))
        protocol = tmp_path / "protocol.json"
        protocol.write_text(json.dumps({
            "scenario": "embedded",
            "harm": {"weight": 5.0, "occurrence_rate": 2.0},
            "steps": [{"id": "s1", "category": "acq"}, {"id": "s2", "p": 0.5}],
        }))
        result = subprocess.run(
            [sys.executable, "-m", "mocet", "score", "--corpus", str(corpus),
             "--protocol", str(protocol), "--k", "5", "--trials", "100", "--seed", "1"],
            capture_output=True,
        )
        assert result.returncode == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["steps"][0]["source"] == "category"


def _real_model_or_skip():
    try:
        return resolve_encoder("all-mpnet-base-v2")
    except EmbedError as exc:
        pytest.skip(f"pretrained model unavailable here: {exc}")


@pytest.mark.slow
class TestPretrainedModel:
    def test_deterministic_and_loadable(self, tmp_path):
        encoder = _real_model_or_skip()
        first = encoder.encode(["calibrate the instrument"])
        second = encoder.encode(["calibrate the instrument"])
        assert first == second
        assert len(first[0]) == encoder.dim
