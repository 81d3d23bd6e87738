"""JSON serialization of densities, including the reconstructed tail."""

import copy
import json

import numpy as np
import pytest

from radialmot import (
    DensityFormatError,
    from_dict,
    load,
    save,
    to_dict,
)
from radialmot.density_io import SCHEMA_VERSION


def _same_density(a, b, points):
    for x in points:
        assert b.pdf(x) == pytest.approx(a.pdf(x), rel=1e-12, abs=1e-15)
        assert b.cdf(x) == pytest.approx(a.cdf(x), rel=1e-12, abs=1e-15)


class TestRoundTrip:
    def test_uniform(self, uniform):
        doc = to_dict(uniform)
        assert doc["schema_version"] == SCHEMA_VERSION
        again = from_dict(doc)
        _same_density(uniform, again, np.linspace(0.0, 1.0, 13))

    def test_blocks(self, blocks):
        again = from_dict(to_dict(blocks))
        _same_density(blocks, again, [0.2, 0.9, 1.5, 2.4, 14.0, 15.5, 16.0])

    def test_table_segment(self):
        from radialmot import RadialDensity, TableSegment

        xs = np.linspace(0.0, 2.0, 31)
        rho = RadialDensity([TableSegment(xs, np.full(31, 0.5))])
        again = from_dict(to_dict(rho))
        _same_density(rho, again, np.linspace(0.0, 2.0, 11))

    def test_counterexample_tail(self, cex):
        doc = to_dict(cex)
        kinds = [s["kind"] for s in doc["segments"]]
        assert kinds[-1] == "pushforward-tail"
        assert doc["segments"][-1]["data"]["k"] == 4
        again = from_dict(doc)
        _same_density(cex, again, [0.05, 0.5, 0.95, 0.9999, 1.0001, 1.5, 3.0])
        # loaded density carries the rebuilt tail machinery
        assert again.tail_spec.order == 4
        assert again.psi(0.1) == pytest.approx(cex.psi(0.1), rel=1e-12)

    def test_file_round_trip(self, tmp_path, blocks):
        p = tmp_path / "rho.json"
        save(blocks, p)
        again = load(p)
        _same_density(blocks, again, [0.5, 2.5, 15.5])
        # on-disk document is plain JSON
        doc = json.loads(p.read_text())
        assert doc["schema_version"] == SCHEMA_VERSION

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load(tmp_path / "nope.json")


class TestValidation:
    def _base(self, blocks):
        return to_dict(blocks)

    def test_not_a_mapping(self):
        with pytest.raises(DensityFormatError):
            from_dict([1, 2, 3])

    def test_wrong_schema_version(self, blocks):
        doc = self._base(blocks)
        doc["schema_version"] = 99
        with pytest.raises(DensityFormatError, match="schema_version"):
            from_dict(doc)

    def test_unknown_kind_names_segment(self, blocks):
        doc = self._base(blocks)
        doc["segments"][1]["kind"] = "spline"
        with pytest.raises(DensityFormatError, match="segment 1"):
            from_dict(doc)

    def test_poly_degree_cap(self, blocks):
        doc = self._base(blocks)
        doc["segments"][0]["data"]["coeffs"] = [0.2, 0.1, 0.0, 0.0, 0.1]
        with pytest.raises(DensityFormatError, match="degree"):
            from_dict(doc)

    def test_interval_must_be_ordered(self, blocks):
        doc = self._base(blocks)
        doc["segments"][0]["interval"] = [1.0, 0.0]
        with pytest.raises(DensityFormatError):
            from_dict(doc)

    def test_tail_must_be_last(self, cex):
        doc = to_dict(cex)
        doc["segments"] = [doc["segments"][-1], *doc["segments"][:-1]]
        with pytest.raises(DensityFormatError):
            from_dict(doc)

    def test_tail_order_range(self, cex):
        doc = to_dict(cex)
        doc["segments"][-1]["data"]["k"] = 9
        with pytest.raises(DensityFormatError):
            from_dict(doc)

    def test_tail_integrity_cross_check(self, cex):
        doc = copy.deepcopy(to_dict(cex))
        stored = doc["segments"][-1]["data"]["h_taylor"]
        stored[1] *= 1.5
        with pytest.raises(DensityFormatError, match="h_taylor"):
            from_dict(doc)

    def test_missing_coeffs(self, blocks):
        doc = self._base(blocks)
        del doc["segments"][0]["data"]["coeffs"]
        with pytest.raises(DensityFormatError, match="segment 0"):
            from_dict(doc)
