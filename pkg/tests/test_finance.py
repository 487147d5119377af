import numpy as np
import pytest

from linmdd import PermutationPlan
from linmdd.errors import InputFormatError, MissingColumn, MissingValue, NonNumericCell
from linmdd.finance import (
    DEFAULT_SCHEMA,
    SAVED_SCHEMA,
    CaseStudySpec,
    FactorPanel,
    PanelSchema,
    assemble_sample,
    builtin_panel_path,
    builtin_specs,
    load_builtin_panel,
    load_panel,
    run_case,
    save_panel,
)


@pytest.fixture(scope="module")
def panel():
    return load_builtin_panel()


def _toy_rows(n=12, rf_value=1.0):
    rng = np.random.default_rng(40)
    rows = []
    for i in range(n):
        vals = np.round(rng.normal(5.0, 10.0, size=6), 2)
        ba = round(float(vals[0] + rf_value + rng.normal(0, 5)), 2)
        rows.append((1990 + i, *vals[:5], rf_value, ba))
    return rows


def _write_panel(path, rows, header="year,mkt_rf,smb,hml,rmw,cma,rf,ba"):
    lines = [header] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_builtin_panel_shape(panel):
    assert panel.n == 53
    assert panel.years[0] == 1964 and panel.years[-1] == 2016
    assert all(b > a for a, b in zip(panel.years, panel.years[1:]))


def test_builtin_panel_unit_normalization(panel):
    # First data row of the fixture: 1964,6.19,...,5.18,57.25 in percent.
    assert panel.mkt_excess[0] == 6.19 * 0.01
    assert panel.rf[0] == 5.18 * 0.01
    assert panel.asset_excess[0] == 57.25 * 0.01 - 5.18 * 0.01


def test_missing_column_is_reported(tmp_path, panel):
    rows = _toy_rows()
    path = _write_panel(
        tmp_path / "nohml.csv",
        [(r[0], r[1], r[2], r[4], r[5], r[6], r[7]) for r in rows],
        header="year,mkt_rf,smb,rmw,cma,rf,ba",
    )
    with pytest.raises(MissingColumn, match="hml"):
        load_panel(path)


def test_missing_value_names_row_and_year(tmp_path):
    rows = _toy_rows()
    lines = ["year,mkt_rf,smb,hml,rmw,cma,rf,ba"]
    for i, row in enumerate(rows):
        cells = [str(v) for v in row]
        if i == 3:
            cells[2] = ""
        lines.append(",".join(cells))
    path = tmp_path / "gap.csv"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MissingValue, match="row 5 .year 1993."):
        load_panel(path)


def test_non_numeric_cell_is_reported(tmp_path):
    rows = [list(r) for r in _toy_rows()]
    rows[1][4] = "n/a"
    path = _write_panel(tmp_path / "text.csv", rows)
    with pytest.raises(NonNumericCell, match="row 3"):
        load_panel(path)


def test_short_row_is_a_missing_value(tmp_path):
    rows = [list(r) for r in _toy_rows()]
    rows[2] = rows[2][:-1]
    path = _write_panel(tmp_path / "short.csv", rows)
    with pytest.raises(MissingValue, match="row 4"):
        load_panel(path)


def test_zero_risk_free_means_excess_equals_raw(tmp_path):
    rows = _toy_rows(rf_value=0.0)
    path = _write_panel(tmp_path / "rf0.csv", rows)
    loaded = load_panel(path)
    raw = np.array([row[7] for row in rows], dtype=float) * 0.01
    assert np.allclose(loaded.asset_excess, raw, rtol=0, atol=0)


def test_save_load_round_trip_is_bitwise(tmp_path, panel):
    path = tmp_path / "canonical.csv"
    save_panel(panel, path)
    back = load_panel(path, SAVED_SCHEMA)
    assert back.years == panel.years
    for name in FactorPanel.column_names():
        assert np.array_equal(getattr(back, name), getattr(panel, name))


def test_panel_invariants():
    years = tuple(range(1990, 2002))
    ones = np.zeros(12)
    cols = {name: ones for name in FactorPanel.column_names()}
    with pytest.raises(InputFormatError, match="strictly increasing"):
        FactorPanel(years=(2000,) + years[1:], **cols)
    with pytest.raises(InputFormatError, match="at least 10"):
        FactorPanel(years=years[:5], **{k: np.zeros(5) for k in cols})
    with pytest.raises(InputFormatError, match="values for"):
        FactorPanel(years=years, **{**cols, "smb": np.zeros(11)})
    bad = ones.copy()
    bad[3] = np.nan
    with pytest.raises(MissingValue):
        FactorPanel(years=years, **{**cols, "hml": bad})


def test_schema_validation():
    with pytest.raises(ValueError, match="units"):
        PanelSchema(columns=DEFAULT_SCHEMA.columns, units="bps")
    with pytest.raises(ValueError, match="lacks roles"):
        PanelSchema(columns={"year": "year", "asset_raw": "ba"})
    both = dict(DEFAULT_SCHEMA.columns, asset_excess="ex")
    with pytest.raises(ValueError, match="exactly one"):
        PanelSchema(columns=both)


def test_schema_from_config(tmp_path):
    config = {
        "units": "decimal",
        "columns": {
            "yr": "year", "MKT": "mkt_excess", "SMB": "smb", "HML": "hml",
            "RMW": "rmw", "CMA": "cma", "RF": "rf", "RET": "asset_excess",
        },
    }
    schema = PanelSchema.from_config(config)
    assert schema.units == "decimal"
    assert schema.columns["hml"] == "HML"
    assert schema.asset_role == "asset_excess"

    import json

    path = tmp_path / "schema.json"
    path.write_text(json.dumps(config))
    assert PanelSchema.from_config(path) == schema

    with pytest.raises(InputFormatError, match="columns"):
        PanelSchema.from_config({"units": "percent"})
    dup = dict(config, columns={**config["columns"], "HML2": "hml"})
    with pytest.raises(InputFormatError, match="two columns"):
        PanelSchema.from_config(dup)


def test_builtin_specs_contents():
    specs = builtin_specs()
    assert [s.name for s in specs] == ["capm-vs-ff3", "ff3-vs-ff5", "hml-redundancy"]
    capm, ff5, hml = specs
    assert capm.x_columns == ("smb", "hml")
    assert capm.z_columns == ("const", "mkt_excess")
    assert ff5.x_columns == ("rmw", "cma")
    assert ff5.z_columns == ("const", "mkt_excess", "smb", "hml")
    assert hml.x_columns == ("hml",)
    assert hml.z_columns == ("const", "mkt_excess", "smb", "rmw", "cma")
    assert all(s.y_column == "asset_excess" for s in specs)


def test_case_spec_normalization_and_disjointness():
    spec = CaseStudySpec(name="t", x_columns=("smb",), z_columns=("mkt_excess",),
                         y_column="asset_excess")
    assert spec.z_columns == ("const", "mkt_excess")
    with pytest.raises(ValueError, match="first"):
        CaseStudySpec(name="t", x_columns=("smb",), z_columns=("mkt_excess", "const"),
                      y_column="asset_excess")
    with pytest.raises(ValueError, match="disjoint"):
        CaseStudySpec(name="t", x_columns=("smb",), z_columns=("smb",), y_column="asset_excess")
    with pytest.raises(ValueError, match="empty"):
        CaseStudySpec(name="t", x_columns=(), z_columns=("smb",), y_column="asset_excess")


def test_assemble_sample_shapes(panel):
    sample = assemble_sample(panel, builtin_specs()[0])
    assert sample.x.shape == (53, 2)
    assert sample.y.shape == (53, 1)
    assert sample.z.shape == (53, 2)
    assert np.array_equal(sample.z[:, 0], np.ones(53))
    assert np.array_equal(sample.x[:, 0], panel.smb)
    with pytest.raises(MissingColumn):
        panel.column("momentum")


def test_case_decisions_match_published_story(panel):
    plan = PermutationPlan(500, 1729)
    reports = {s.name: run_case(panel, s, plan) for s in builtin_specs()}
    assert reports["capm-vs-ff3"].decision == "reject"
    assert reports["ff3-vs-ff5"].decision == "fail_to_reject"
    assert reports["hml-redundancy"].decision == "fail_to_reject"
    for name, report in reports.items():
        assert report.name == name
        assert report.alpha == 0.1
        assert report.num_permutations == 500


def test_fixture_file_is_commented_percent_csv():
    text = builtin_panel_path().read_text()
    assert text.startswith("#")
    header = next(ln for ln in text.splitlines() if not ln.startswith("#"))
    assert header == "year,mkt_rf,smb,hml,rmw,cma,rf,ba"
