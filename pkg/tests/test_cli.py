"""Tests for the command-line entry point."""

import json

import numpy as np

from seamgraph.cli import EXIT_INPUT, EXIT_OK, build_parser, main
from seamgraph.gnn.checkpoint import save_checkpoint
from seamgraph.gnn.model import init_model
from seamgraph.models import ModelSpec
from seamgraph.toolkit.dataset import load_labeled


def _gen(tmp_path, capsys, count=2):
    out = tmp_path / "synth"
    args = ["gen-synth", "--count", str(count), "--segments", "8", "--rings", "2"]
    code = main(["--out-dir", str(out), *args])
    assert code == EXIT_OK
    capsys.readouterr()
    return sorted((out / "train").glob("*.obj"))


class TestGenSynth:
    def test_writes_meshes_and_labels(self, tmp_path, capsys):
        files = _gen(tmp_path, capsys, count=3)
        assert len(files) == 3
        for path in files:
            mesh, labels = load_labeled(path)
            assert labels.shape == (mesh.n_edges,)
            assert labels.any()


class TestUnwrap:
    def test_writes_artifacts(self, tmp_path, capsys):
        path = _gen(tmp_path, capsys)[0]
        out = tmp_path / "out"
        assert main(["--out-dir", str(out), "unwrap", str(path)]) == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["shells"] == 3
        assert (out / f"{path.stem}.obj").exists()
        assert (out / f"{path.stem}.distortion.ply").exists()
        values = json.loads((out / f"{path.stem}.distortion.json").read_text())
        assert all(v > 0 for v in values)

    def test_bad_mesh(self, tmp_path):
        path = tmp_path / "broken.obj"
        path.write_text("v 0 0\nf 1 2 3\n")
        assert main(["--out-dir", str(tmp_path), "unwrap", str(path)]) == EXIT_INPUT

    def test_missing_file(self, tmp_path):
        missing = str(tmp_path / "absent.obj")
        assert main(["--out-dir", str(tmp_path), "unwrap", missing]) == EXIT_INPUT


class TestPredict:
    def test_writes_probabilities(self, tmp_path, capsys):
        path = _gen(tmp_path, capsys)[0]
        model = init_model(ModelSpec(arch="gcn", hidden=4, layers=1))
        ckpt = save_checkpoint(model, tmp_path / "model.json")
        out = tmp_path / "out"
        code = main(["--out-dir", str(out), "predict", str(path), "--checkpoint", str(ckpt)])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        probs = json.loads((out / f"{path.stem}.probs.json").read_text())
        assert len(probs) == payload["edges"]
        assert all(0.0 <= p <= 1.0 for p in probs)


class TestRefineCommands:
    def test_skeletonize_and_dst(self, tmp_path, capsys):
        path = _gen(tmp_path, capsys)[0]
        mesh, labels = load_labeled(path)
        probs_path = tmp_path / "probs.json"
        probs_path.write_text(json.dumps(np.where(labels == 1, 0.95, 0.05).tolist()))
        out = tmp_path / "out"

        code = main(["--out-dir", str(out), "refine-dst", str(path), "--probs", str(probs_path)])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["mesh"] == mesh.name
        assert (out / f"{mesh.name}.steiner.json").exists()

        code = main(["--out-dir", str(out), "skeletonize", str(path), "--probs", str(probs_path)])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["seam_edges"] > 0

    def test_wrong_probability_count(self, tmp_path, capsys):
        path = _gen(tmp_path, capsys)[0]
        probs_path = tmp_path / "probs.json"
        probs_path.write_text("[0.5, 0.5]")
        args = ["skeletonize", str(path), "--probs", str(probs_path)]
        code = main(["--out-dir", str(tmp_path), *args])
        assert code == EXIT_INPUT


class TestToolkitCommands:
    def test_decimate_target_too_small(self, tmp_path, capsys):
        path = _gen(tmp_path, capsys)[0]
        code = main(["--out-dir", str(tmp_path), "decimate", str(path), "--target-faces", "2"])
        assert code == EXIT_INPUT

    def test_augment(self, tmp_path, capsys):
        path = _gen(tmp_path, capsys)[0]
        out = tmp_path / "aug"
        assert main(["--out-dir", str(out), "augment", str(path), "--count", "2"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["written"] == 2
        assert len(list((out / "train").glob("*.obj"))) == 2


class TestEval:
    def test_needs_checkpoint(self, tmp_path):
        code = main(["--out-dir", str(tmp_path), "eval", "--test-dir", str(tmp_path)])
        assert code == EXIT_INPUT


class TestGlobalFlags:
    def test_accepted_after_subcommand(self):
        args = build_parser().parse_args(["gen-synth", "--seed", "3", "--out-dir", "o"])
        assert (args.seed, args.out_dir) == (3, "o")

    def test_accepted_before_subcommand(self):
        args = build_parser().parse_args(["--seed", "3", "--log-level", "debug", "gen-synth"])
        assert (args.seed, args.log_level, args.out_dir) == (3, "debug", None)

    def test_same_output_either_position(self, tmp_path, capsys):
        synth = ["--count", "2", "--segments", "8", "--rings", "2", "--noise", "0.01"]
        before, after = tmp_path / "before", tmp_path / "after"
        assert main(["--out-dir", str(before), "--seed", "5", "gen-synth", *synth]) == EXIT_OK
        assert main(["gen-synth", *synth, "--out-dir", str(after), "--seed", "5"]) == EXIT_OK
        capsys.readouterr()
        names = sorted(p.name for p in (before / "train").iterdir())
        assert names == sorted(p.name for p in (after / "train").iterdir())
        for name in names:
            assert (before / "train" / name).read_bytes() == (after / "train" / name).read_bytes()
