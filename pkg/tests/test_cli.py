"""End-user command behavior: flag handling, exit codes, deterministic
corpus emission, and the report plumbing."""

import json

import pytest

from primeaudit.cli import (
    EXIT_FINDINGS,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    main,
)
from primeaudit.keyio import KeyRecord, encode_pem, encode_ssh_rsa, write_corpus
from primeaudit.rsa import KeyGenPolicy, PublicKey, generate_corpus
from primeaudit.arith import RandomSource, next_prime, random_prime


def _write_corpus_file(path, records):
    with open(path, "w", encoding="utf-8") as handle:
        write_corpus(records, handle)


@pytest.fixture
def hardened_corpus(tmp_path):
    keys = generate_corpus(KeyGenPolicy(modulus_bits=192), 3, RandomSource(5))
    path = tmp_path / "hardened.jsonl"
    _write_corpus_file(path, [
        KeyRecord(id=f"h{i}", key=k.public()) for i, k in enumerate(keys)
    ])
    return path


@pytest.fixture
def weak_corpus(tmp_path):
    p = random_prime(96, RandomSource(8))
    q = next_prime(p + 100)
    shared = random_prime(96, RandomSource(9))
    records = [
        KeyRecord(id="close", key=PublicKey(p * q, 65537)),
        KeyRecord(id="share-a", key=PublicKey(shared * random_prime(96, RandomSource(10)), 65537)),
        KeyRecord(id="share-b", key=PublicKey(shared * random_prime(96, RandomSource(11)), 65537)),
    ]
    path = tmp_path / "weak.jsonl"
    _write_corpus_file(path, records)
    return path


class TestAuditCommand:
    def test_clean_corpus_exit_zero(self, hardened_corpus, capsys):
        code = main(["audit", "--corpus", str(hardened_corpus),
                     "--fermat-budget", "2000"])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["findings"] == []
        assert report["corpus_size"] == 3

    def test_weak_corpus_exit_one(self, weak_corpus, capsys):
        code = main(["audit", "--corpus", str(weak_corpus),
                     "--fermat-budget", "5000"])
        assert code == EXIT_FINDINGS
        report = json.loads(capsys.readouterr().out)
        vulns = {f["key_id"]: f["vuln"] for f in report["findings"]}
        assert vulns == {"close": "ClosePrime", "share-a": "SharedPrime",
                         "share-b": "SharedPrime"}

    def test_report_file(self, weak_corpus, tmp_path):
        out = tmp_path / "report.json"
        code = main(["audit", "--corpus", str(weak_corpus), "--report", str(out)])
        assert code == EXIT_FINDINGS
        assert json.loads(out.read_text())["corpus_size"] == 3

    def test_missing_inputs(self, capsys):
        assert main(["audit"]) == EXIT_USAGE
        assert "no inputs" in capsys.readouterr().err

    def test_nonexistent_path(self, tmp_path, capsys):
        assert main(["audit", "--corpus", str(tmp_path / "nope.jsonl")]) == EXIT_USAGE

    def test_malformed_corpus(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "n": "XYZ", "e": "3"}\n')
        assert main(["audit", "--corpus", str(path)]) == EXIT_PARSE

    def test_merges_all_input_kinds(self, tmp_path, capsys):
        keys = generate_corpus(KeyGenPolicy(modulus_bits=192), 3, RandomSource(6))
        corpus = tmp_path / "c.jsonl"
        _write_corpus_file(corpus, [KeyRecord(id="c0", key=keys[0].public())])
        pem = tmp_path / "k.pem"
        pem.write_text(encode_pem(keys[1].public()))
        ssh = tmp_path / "k.pub"
        ssh.write_text("# host keys\n" + encode_ssh_rsa(keys[2].public(), "host") + "\n")
        code = main(["audit", "--corpus", str(corpus), "--pem", str(pem),
                     "--ssh", str(ssh), "--fermat-budget", "100"])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["corpus_size"] == 3

    def test_reconstruct_flag(self, weak_corpus, capsys):
        code = main(["audit", "--corpus", str(weak_corpus), "--reconstruct",
                     "--fermat-budget", "5000"])
        assert code == EXIT_FINDINGS
        report = json.loads(capsys.readouterr().out)
        rebuilt = [f for f in report["findings"] if f["reconstructed"]]
        assert len(rebuilt) == 3
        for entry in rebuilt:
            assert set(entry["reconstructed"]) == {"p", "q", "d"}


class TestBatchgcdCommand:
    def test_skips_fermat(self, weak_corpus, capsys):
        code = main(["batchgcd", "--corpus", str(weak_corpus)])
        assert code == EXIT_FINDINGS
        report = json.loads(capsys.readouterr().out)
        vulns = {f["vuln"] for f in report["findings"]}
        assert vulns == {"SharedPrime"}
        assert report["timings"]["fermat_total"] == 0.0


class TestFermatCommand:
    def test_factors_composite(self, capsys):
        code = main(["fermat", "--n", "174b"])  # 5963 = 67 * 89
        assert code == EXIT_FINDINGS
        out = capsys.readouterr().out
        assert "p = 43" in out and "q = 59" in out  # hex for 67, 89

    def test_budget_exhausted_is_clean_exit(self, capsys):
        code = main(["fermat", "--n", "6d3", "--budget", "50"])  # 1747 prime
        assert code == EXIT_OK
        assert "budget exhausted" in capsys.readouterr().out

    def test_missing_n_is_usage_error(self, capsys):
        assert main(["fermat"]) == EXIT_USAGE

    def test_bad_hex(self, capsys):
        assert main(["fermat", "--n", "xyz"]) == EXIT_PARSE

    def test_even_n_is_usage_error(self, capsys):
        assert main(["fermat", "--n", "10"]) == EXIT_USAGE


class TestGenCorpusCommand:
    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            code = main(["gen-corpus", "--mode", "hardened", "--count", "4",
                         "--bits", "128", "--seed", "3", "--out", str(out)])
            assert code == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_differs(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["gen-corpus", "--mode", "hardened", "--count", "2",
              "--bits", "128", "--seed", "1", "--out", str(a)])
        main(["gen-corpus", "--mode", "hardened", "--count", "2",
              "--bits", "128", "--seed", "2", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_odd_bits_usage_error(self, tmp_path, capsys):
        code = main(["gen-corpus", "--mode", "hardened", "--count", "1",
                     "--bits", "127", "--out", str(tmp_path / "x.jsonl")])
        assert code == EXIT_USAGE

    def test_shared_mode_pigeonhole(self, tmp_path, capsys):
        path = tmp_path / "shared.jsonl"
        code = main(["gen-corpus", "--mode", "shared", "--count", "100",
                     "--bits", "128", "--seed", "12", "--pool-size", "10",
                     "--tag", "devype", "--out", str(path)])
        assert code == EXIT_OK
        code = main(["batchgcd", "--corpus", str(path)])
        assert code == EXIT_FINDINGS
        report = json.loads(capsys.readouterr().out)
        assert len(report["findings"]) >= 2
        assert report["per_tag_summary"]["devype"]["percentage"] == 100.0

    def test_private_out_validates(self, tmp_path, capsys):
        priv = tmp_path / "priv.jsonl"
        main(["gen-corpus", "--mode", "hardened", "--count", "2", "--bits", "128",
              "--seed", "4", "--out", str(tmp_path / "pub.jsonl"),
              "--private-out", str(priv)])
        code = main(["validate", "--private", str(priv), "--fermat-budget", "500"])
        assert code == EXIT_OK
        assert "PASS" in capsys.readouterr().out

    def test_close_mode_private_fails_validation(self, tmp_path, capsys):
        priv = tmp_path / "priv.jsonl"
        main(["gen-corpus", "--mode", "close", "--count", "2", "--bits", "128",
              "--seed", "4", "--gap-bits", "8", "--out", str(tmp_path / "pub.jsonl"),
              "--private-out", str(priv)])
        code = main(["validate", "--private", str(priv), "--fermat-budget", "500"])
        assert code == EXIT_FINDINGS
        assert "FAIL" in capsys.readouterr().out


class TestValidateCommand:
    def test_pem_public_pass(self, tmp_path, capsys):
        key = generate_corpus(KeyGenPolicy(modulus_bits=192), 1, RandomSource(14))[0]
        pem = tmp_path / "k.pem"
        pem.write_text(encode_pem(key.public()))
        code = main(["validate", "--pem", str(pem), "--fermat-budget", "500"])
        assert code == EXIT_OK

    def test_ssh_close_prime_fails(self, tmp_path, capsys):
        p = random_prime(96, RandomSource(15))
        n = p * next_prime(p + 50)
        ssh = tmp_path / "k.pub"
        ssh.write_text(encode_ssh_rsa(PublicKey(n, 65537)) + "\n")
        code = main(["validate", "--ssh", str(ssh), "--fermat-budget", "500"])
        assert code == EXIT_FINDINGS
        assert "fermat" in capsys.readouterr().out

    def test_requires_exactly_one_source(self, tmp_path, capsys):
        assert main(["validate"]) == EXIT_USAGE
        f = tmp_path / "x"
        f.write_text("")
        assert main(["validate", "--pem", str(f), "--ssh", str(f)]) == EXIT_USAGE

    def test_malformed_private_line(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text('{"n": "zz"}\n')
        assert main(["validate", "--private", str(path)]) == EXIT_PARSE


def test_unknown_command_is_usage_error():
    assert main(["frobnicate"]) == EXIT_USAGE
