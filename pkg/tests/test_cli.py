import json

import pytest

from qwalk.analysis import binomial_reference, model_distribution
from qwalk.cli import main
from qwalk.config import ConfigError, parse_config
from qwalk.lattice import evolve, uniform_schedule


@pytest.fixture
def write_config(tmp_path):
    def _write(**fields):
        cfg = {"version": 1, **fields}
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        return str(path)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def final(env):
    d = env["summary"]["final_distribution"]
    return dict(zip(d["positions"], d["probabilities"]))


class TestRun:
    def test_pure_six_steps(self, capsys, write_config):
        code, out, _ = run(capsys, "run", "--config", write_config(steps=6))
        assert code == 0
        env = json.loads(out)
        rec = evolve(uniform_schedule(6))
        for k, step in enumerate(env["per_step"]):
            ref = rec.distributions[k].as_dict()
            got = dict(zip(step["distribution"]["positions"], step["distribution"]["probabilities"]))
            assert got == pytest.approx(ref, abs=1e-12)
            assert sum(got.values()) == pytest.approx(1.0, abs=1e-10)

    def test_classical(self, capsys, write_config):
        code, out, _ = run(capsys, "run", "--config", write_config(steps=6, q=1.0, mode="density"))
        assert code == 0
        assert final(json.loads(out)) == pytest.approx(binomial_reference(6).as_dict(), abs=1e-12)

    def test_zero_steps(self, capsys, write_config):
        code, out, _ = run(capsys, "run", "--config", write_config(steps=0, initial_position=2))
        env = json.loads(out)
        assert code == 0 and final(env) == {2: pytest.approx(1.0, abs=1e-15)}
        assert env["summary"]["spreading_exponent"] is None

    def test_csv(self, capsys, write_config, tmp_path):
        csv_path = tmp_path / "out.csv"
        run(capsys, "run", "--config", write_config(steps=2), "--csv", str(csv_path))
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "step,position,probability"
        assert "2,0,0.5" in lines

    def test_trajectories_deterministic(self, capsys, write_config):
        cfg = write_config(steps=4, q=0.5, mode="trajectories", samples=2000, seed=9)
        _, a, _ = run(capsys, "run", "--config", cfg)
        _, b, _ = run(capsys, "run", "--config", cfg)
        assert a == b
        _, c, _ = run(capsys, "run", "--config", cfg, "--seed", "10")
        assert c != a and json.loads(c)["seed"] == 10

    def test_mode_override_rejected_for_pure_with_q(self, capsys, write_config):
        code, _, err = run(capsys, "run", "--config", write_config(steps=3, q=0.2, mode="density"),
                           "--mode", "pure")
        assert code == 2 and "'q'" in err


class TestSweep:
    def test_endpoints(self, capsys, write_config):
        code, out, _ = run(capsys, "sweep-q", "--config", write_config(steps=5), "--q", "0", "1")
        envs = json.loads(out)
        assert code == 0 and len(envs) == 2
        assert final(envs[0]) == pytest.approx(evolve(uniform_schedule(5)).final_distribution.as_dict(), abs=1e-12)
        assert final(envs[1]) == pytest.approx(binomial_reference(5).as_dict(), abs=1e-12)

    def test_eleven_values(self, capsys, write_config, tmp_path):
        qs = [f"{k / 10:.1f}" for k in range(11)]
        csv_path = tmp_path / "sweep.csv"
        _, out, _ = run(capsys, "sweep-q", "--config", write_config(steps=5), "--q", *qs,
                        "--csv", str(csv_path))
        envs = json.loads(out)
        assert len(envs) == 11
        for q, env in zip(qs, envs):
            ref = model_distribution(uniform_schedule(5), float(q)).nonzero().as_dict()
            assert final(env) == pytest.approx(ref, abs=1e-12)
        assert csv_path.read_text().splitlines()[0] == "q,position,probability"

    def test_empty(self, capsys, write_config):
        code, out, _ = run(capsys, "sweep-q", "--config", write_config(steps=5))
        assert code == 0 and json.loads(out) == []

    def test_out_of_range(self, capsys, write_config):
        code, _, err = run(capsys, "sweep-q", "--config", write_config(steps=5), "--q", "1.5")
        assert code == 2 and "'q'" in err


class TestAbsorb:
    @pytest.mark.parametrize(
        "fields, expected",
        [
            (dict(steps=5, absorbers=[-1]), 3 / 8),
            (dict(steps=5, absorbers=[-1], q=1.0, mode="density"), 5 / 16),
            (dict(steps=5, absorbers=[7]), 1.0),
        ],
    )
    def test_transmission(self, capsys, write_config, fields, expected):
        code, out, _ = run(capsys, "absorb", "--config", write_config(**fields))
        env = json.loads(out)
        assert code == 0
        assert env["summary"]["transmission"] == pytest.approx(expected, abs=1e-12)
        cum = [s["cumulative_absorbed"] for s in env["per_step"]]
        assert cum[-1] + env["summary"]["transmission"] == pytest.approx(1.0, abs=1e-10)

    def test_step_range(self, capsys, write_config):
        cfg = write_config(steps=5, absorbers=[{"position": -1, "from_step": 1, "to_step": 1}])
        _, out, _ = run(capsys, "absorb", "--config", cfg)
        assert json.loads(out)["summary"]["transmission"] == pytest.approx(0.5, abs=1e-12)

    def test_requires_absorbers(self, capsys, write_config):
        code, _, err = run(capsys, "absorb", "--config", write_config(steps=5))
        assert code == 2 and "'absorbers'" in err


class TestFit:
    def _csv(self, tmp_path, dist):
        p = tmp_path / "measured.csv"
        rows = ["position,probability"] + [f"{j},{v:.12g}" for j, v in dist.items()]
        p.write_text("\n".join(rows) + "\n")
        return str(p)

    def test_recovers_q(self, capsys, write_config, tmp_path):
        d = model_distribution(uniform_schedule(5), 0.4).nonzero().as_dict()
        code, out, _ = run(capsys, "fit", "--config", write_config(steps=5),
                           "--measured", self._csv(tmp_path, d))
        assert code == 0 and json.loads(out)["q_hat"] == pytest.approx(0.4, abs=1e-3)

    def test_pure(self, capsys, write_config, tmp_path):
        d = evolve(uniform_schedule(5)).final_distribution.nonzero().as_dict()
        _, out, _ = run(capsys, "fit", "--config", write_config(steps=5),
                        "--measured", self._csv(tmp_path, d))
        assert json.loads(out)["q_hat"] == pytest.approx(0.0, abs=1e-3)

    @pytest.mark.parametrize("body", [
        "position,probability\n0,0.5\n2,0.3\n",
        "pos,p\n0,1\n",
        "position,probability\n0,abc\n",
        "position,probability\n",
    ])
    def test_bad_csv(self, capsys, write_config, tmp_path, body):
        p = tmp_path / "bad.csv"
        p.write_text(body)
        code, _, err = run(capsys, "fit", "--config", write_config(steps=5), "--measured", str(p))
        assert code == 2 and "measured" in err


class TestApparatus:
    def test_elements(self, capsys):
        code, out, _ = run(capsys, "apparatus", "elements", "--n", "6")
        d = json.loads(out)
        assert code == 0 and (d["this_scheme"], d["triangular_scheme"]) == (12, 21)

    def test_loss(self, capsys):
        _, out, _ = run(capsys, "apparatus", "loss", "--n", "6", "--rate", "0.01")
        assert round(json.loads(out)["survival"], 4) == 0.9415

    def test_visibility(self, capsys):
        _, out, _ = run(capsys, "apparatus", "visibility", "--q", "0")
        assert json.loads(out)["visibility"] == pytest.approx(1.0, abs=1e-10)

    def test_calibrate(self, capsys):
        _, out, _ = run(capsys, "apparatus", "calibrate", "--angle", "10.5")
        assert json.loads(out)["q"] == 1.0

    def test_bad_input_exit_2(self, capsys):
        code, _, _ = run(capsys, "apparatus", "elements", "--n", "0")
        assert code == 2


class TestValidation:
    @pytest.mark.parametrize(
        "fields, bad",
        [
            (dict(steps=-1), "steps"),
            (dict(steps="5"), "steps"),
            (dict(steps=3, initial_coin="Q"), "initial_coin"),
            (dict(steps=3, initial_coin=[[1, 0], [1, 0]]), "initial_coin"),
            (dict(steps=3, initial_position=0.5), "initial_position"),
            (dict(steps=3, coin="grover"), "coin"),
            (dict(steps=3, coin=["hadamard"]), "coin"),
            (dict(steps=3, q=1.5, mode="density"), "q"),
            (dict(steps=3, q=[0.1, 0.2], mode="density"), "q"),
            (dict(steps=3, q=0.3), "q"),
            (dict(steps=3, absorbers=[0.5]), "absorbers"),
            (dict(steps=3, absorbers=[{"position": 1, "from_step": 0}]), "absorbers"),
            (dict(steps=3, mode="quantum"), "mode"),
            (dict(steps=3, samples=0, mode="trajectories"), "samples"),
            (dict(steps=3, seed=-5), "seed"),
            (dict(steps=3, seed=2**64), "seed"),
            (dict(steps=3, colour="red"), "colour"),
            (dict(version=2, steps=3), "version"),
            (dict(), "steps"),
        ],
    )
    def test_field_named(self, capsys, write_config, fields, bad):
        code, _, err = run(capsys, "run", "--config", write_config(**fields))
        assert code == 2
        assert f"'{bad}'" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "run", "--config", str(tmp_path / "nope.json"))
        assert code == 2 and "'config'" in err

    def test_invalid_json(self, capsys, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{not json")
        code, _, _ = run(capsys, "run", "--config", str(p))
        assert code == 2

    def test_version_missing(self):
        with pytest.raises(ConfigError) as exc:
            parse_config({"steps": 1})
        assert exc.value.field == "version"

    def test_echo_round_trip(self):
        cfg = parse_config({"version": 1, "steps": 3, "coin": ["hadamard", 10, 22.5],
                            "q": [0, 0.5, 1], "absorbers": [-1, {"position": 2, "to_step": 2}],
                            "mode": "density", "initial_coin": [[0.6, 0], [0, 0.8]], "seed": 12})
        first = json.dumps(cfg.to_dict(), sort_keys=True)
        again = json.dumps(parse_config(json.loads(first)).to_dict(), sort_keys=True)
        assert first == again
