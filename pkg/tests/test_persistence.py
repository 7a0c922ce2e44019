import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from glyphnet import persistence as io
from glyphnet.errors import (
    BadMagic,
    EmptyInput,
    InvalidBit,
    InvalidCharacter,
    InvalidLabel,
    MalformedHeader,
    NonFiniteValue,
    RaggedRows,
    ShapeMismatch,
    TruncatedData,
    UnsupportedMaxval,
    WrongArity,
)
from glyphnet.mlp import MULTICLASS_TOPOLOGY, PER_LETTER_TOPOLOGY, Network, TrainConfig, forward, init_network


class TestPgm:
    def test_p2(self):
        img = io.parse_pgm(b"P2 2 2 255 0 0 0 0")
        assert img.dtype == np.uint8 and img.shape == (2, 2) and img.sum() == 0

    def test_p5_equivalent(self):
        assert np.array_equal(io.parse_pgm(b"P5\n2 2\n255\n\x00\x00\x00\x00"), io.parse_pgm(b"P2 2 2 255 0 0 0 0"))

    def test_comments_and_layout(self):
        data = b"P2\n# made by hand\n3 1 # width height\n255\n10 20\n30\n"
        assert io.parse_pgm(data).tolist() == [[10, 20, 30]]

    def test_low_maxval_is_rescaled(self):
        assert io.parse_pgm(b"P2 2 1 1 0 1").tolist() == [[0, 255]]

    def test_unsupported_maxval(self):
        with pytest.raises(UnsupportedMaxval):
            io.parse_pgm(b"P2 1 1 65535 0")

    @pytest.mark.parametrize("data", [b"", b"P6 1 1 255 0", b"P2 x 1 255 0", b"P2 1", b"P2 0 1 255"])
    def test_malformed(self, data):
        with pytest.raises(MalformedHeader):
            io.parse_pgm(data)

    @pytest.mark.parametrize("data", [b"P5\n2 2\n255\n\x00\x00", b"P2 2 2 255 0 0 0"])
    def test_truncated(self, data):
        with pytest.raises(TruncatedData):
            io.parse_pgm(data)

    def test_canonical_write(self):
        assert io.write_pgm(np.zeros((1, 1), np.uint8)) == b"P5\n1 1\n255\n\x00"
        data = io.write_pgm(np.zeros((2, 2), np.uint8))
        # "P5\n2 2\n255\n" is 11 header bytes
        assert len(data) == 11 + 4 and data.startswith(b"P5\n2 2\n255\n")

    @given(arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9))))
    def test_round_trip(self, img):
        data = io.write_pgm(img)
        assert np.array_equal(io.parse_pgm(data), img)
        assert io.write_pgm(io.parse_pgm(data)) == data


class TestGlyphText:
    def test_parse(self):
        assert io.parse_glyph_text("#.\n.#").ravel().tolist() == [1, 0, 0, 1]
        assert io.parse_glyph_text("#.\n.#\n").shape == (2, 2)

    def test_errors(self):
        with pytest.raises(RaggedRows):
            io.parse_glyph_text("##\n#")
        with pytest.raises(EmptyInput):
            io.parse_glyph_text("")
        with pytest.raises(InvalidCharacter):
            io.parse_glyph_text("#x")

    @given(arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.integers(0, 1)))
    def test_round_trip(self, bits):
        assert np.array_equal(io.parse_glyph_text(io.format_glyph_text(bits)), bits)


def _net_with(values):
    topo = MULTICLASS_TOPOLOGY[:2]
    net = init_network(topo, TrainConfig(seed=2))
    w = net.weights[0].copy()
    w.flat[: len(values)] = values
    return Network(topo, [w], net.biases)


class TestModel:
    def test_round_trip_bits_and_predictions(self):
        net = init_network(MULTICLASS_TOPOLOGY, TrainConfig(seed=31))
        back = io.load_model(io.save_model(net))
        assert back.same_bits(net) and back.topology == net.topology
        x = np.random.default_rng(0).integers(0, 2, 25).astype(float)
        assert forward(back, x)[-1].tobytes() == forward(net, x)[-1].tobytes()

    def test_special_values_survive(self):
        special = [-0.0, 5e-324, -2.2250738585072014e-308 / 3, 1.7976931348623157e308, 1e-300]
        back = io.load_model(io.save_model(_net_with(special)))
        got = back.weights[0].flat[: len(special)]
        assert [struct.pack(">d", v) for v in got] == [struct.pack(">d", v) for v in special]

    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
    def test_any_finite_values(self, values):
        net = _net_with(values)
        assert io.load_model(io.save_model(net)).same_bits(net)

    def test_format(self):
        text = io.save_model(_net_with([1.0])).decode()
        lines = text.splitlines()
        assert lines[:4] == ["GLYPHNET-MLP 1", "layers 2", "layer 0 25 identity", "layer 1 25 logsig"]
        assert lines[4] == "weights 1 25 25"
        assert lines[5].split()[0] == "3FF0000000000000"
        assert lines[30] == "biases 1 25"

    def test_bad_magic(self):
        data = io.save_model(_net_with([1.0])).replace(b"GLYPHNET-MLP 1", b"GLYPHNET-MLP 9")
        with pytest.raises(BadMagic):
            io.load_model(data)

    def test_shape_mismatch(self):
        data = io.save_model(_net_with([1.0])).replace(b"weights 1 25 25", b"weights 1 25 24")
        with pytest.raises(ShapeMismatch):
            io.load_model(data)

    def test_non_finite(self):
        data = io.save_model(_net_with([1.0])).replace(b"3FF0000000000000", b"7FF0000000000000", 1)
        with pytest.raises(NonFiniteValue):
            io.load_model(data)
        data = io.save_model(_net_with([1.0])).replace(b"3FF0000000000000", b"7FF8000000000000", 1)
        with pytest.raises(NonFiniteValue):
            io.load_model(data)

    def test_truncated(self):
        data = io.save_model(_net_with([1.0]))
        with pytest.raises(TruncatedData):
            io.load_model(data[: data.index(b"biases")])

    def test_model_set_round_trip(self):
        nets = [init_network(PER_LETTER_TOPOLOGY, TrainConfig(seed=s)) for s in range(26)]
        entries = tuple(io.ModelEntry(0, l, 10 + i, "max_epochs", 0.25 * i, n)
                        for i, (l, n) in enumerate(zip(io.LETTERS, nets)))
        models = io.ModelSet("per-letter", 1, entries)
        back = io.load_model_set(io.save_model_set(models))
        assert back.mode == "per-letter" and back.runs == 1
        for a, b in zip(back.entries, entries):
            assert (a.run, a.letter, a.epochs, a.stop_reason, a.final_loss) == \
                   (b.run, b.letter, b.epochs, b.stop_reason, b.final_loss)
            assert a.network.same_bits(b.network)

    def test_bare_model_reads_as_one_run_set(self):
        net = init_network(MULTICLASS_TOPOLOGY)
        models = io.load_model_set(io.save_model(net))
        assert models.runs == 1 and models.mode == "multiclass" and models.entries[0].network.same_bits(net)

    def test_set_member_count_checked(self):
        net = init_network(MULTICLASS_TOPOLOGY)
        data = io.save_model_set(io.ModelSet("multiclass", 2, (io.ModelEntry(0, None, 1, "max_epochs", 0.1, net),)))
        with pytest.raises(ShapeMismatch):
            io.load_model_set(data)


class TestFeatures:
    def test_write_format(self):
        text = io.write_features([("a", [0] * 25)]).decode()
        header, row = text.splitlines()
        assert header == "label," + ",".join(f"f{i:02d}" for i in range(25))
        assert row == "a," + ",".join(["0"] * 25)

    def test_wrong_arity(self):
        bad = io.write_features([("a", [0] * 25)]).decode().replace(",0\n", "\n")
        with pytest.raises(WrongArity):
            io.read_features(bad.encode())
        with pytest.raises(WrongArity):
            io.write_features([("a", [0] * 24)])

    def test_invalid_values(self):
        good = io.write_features([("a", [0] * 25)]).decode()
        with pytest.raises(InvalidBit):
            io.read_features(good.replace("a,0", "a,2").encode())
        with pytest.raises(InvalidLabel):
            io.read_features(good.replace("\na,", "\nA,").encode())

    @given(st.lists(st.tuples(st.sampled_from(io.LETTERS), st.lists(st.integers(0, 1), min_size=25, max_size=25))))
    def test_round_trip(self, rows):
        back = io.read_features(io.write_features(rows))
        assert [(l, b.tolist()) for l, b in back] == rows

    def test_split_round_trip(self):
        rows = [("train", "q", [1, 0] * 12 + [1]), ("test", "z", [0] * 25)]
        back = io.read_split_features(io.write_split_features(rows))
        assert [(s, l, b.tolist()) for s, l, b in back] == rows
        with pytest.raises(InvalidLabel):
            io.write_split_features([("dev", "a", [0] * 25)])


class TestManifest:
    def test_round_trip_and_layout(self):
        rows = [io.ManifestRow(io.sample_path("a", "train", 0), "a", "train"),
                io.ManifestRow(io.sample_path("a", "test", 0), "a", "test")]
        data = io.write_manifest(rows)
        assert data.decode().splitlines()[0] == "relative_path,label,split"
        assert rows[0].relative_path == "a/train_000.pgm"
        assert io.read_manifest(data) == rows

    def test_duplicate_paths(self):
        row = io.ManifestRow("a/train_000.pgm", "a", "train")
        with pytest.raises(ShapeMismatch):
            io.write_manifest([row, row])
        with pytest.raises(ShapeMismatch):
            io.read_manifest(b"relative_path,label,split\na/x.pgm,a,train\na/x.pgm,a,test\n")
