import numpy as np
import pytest

from linmdd.errors import InputFormatError
from linmdd.simulation import (
    DEFAULT_ALPHAS,
    DEFAULT_N_GRID,
    PROFILES,
    ModelSpec,
    PowerRow,
    PowerTable,
    catalog,
    emit_table,
    generate,
    model_specs,
    read_table,
    run_grid,
)


def _philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(b=0.5, f_kind="linear", c=1.0)
    with pytest.raises(ValueError):
        ModelSpec(b=0.0, f_kind="cubic", c=1.0)
    with pytest.raises(ValueError):
        ModelSpec(b=0.0, f_kind="sine", c=-0.1)
    with pytest.raises(ValueError):
        ModelSpec(b=0.0, f_kind="sine", c=0.5, noise_sd=0.0)


def test_model_ids_cover_the_four_combinations():
    assert ModelSpec(b=0, f_kind="linear", c=0).model_id == 1
    assert ModelSpec(b=0, f_kind="sine", c=0.25).model_id == 2
    assert ModelSpec(b=1, f_kind="linear", c=0).model_id == 3
    assert ModelSpec(b=1, f_kind="sine", c=0.25).model_id == 4


def test_catalog_grids():
    assert [m.c for m in model_specs(1)] == [0.0, 2.0 / 3.0, 1.0, 1.5]
    assert [m.c for m in model_specs(2)] == [0.25, 1.0 / 3.0, 0.5]
    assert [m.c for m in model_specs(3)] == [0.0, 2.0 / 3.0, 1.0, 1.5]
    assert [m.c for m in model_specs(4)] == [0.25, 1.0 / 3.0, 0.5]
    assert len(catalog()) == 14
    assert len(catalog((1, 2))) == 7
    with pytest.raises(ValueError):
        model_specs(5)


def test_generate_is_deterministic():
    model = ModelSpec(b=1.0, f_kind="sine", c=0.5)
    a = generate(model, 64, _philox(1234))
    b = generate(model, 64, _philox(1234))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y) and np.array_equal(a.z, b.z)


def test_generate_draw_order_and_equation():
    # Twin generator: consume draws in the documented Z, X, eps order and
    # rebuild Y; must agree bitwise with generate().
    model = ModelSpec(b=1.0, f_kind="linear", c=1.5)
    n = 48
    sample = generate(model, n, _philox(77))
    rng = _philox(77)
    z = rng.standard_normal((n, 1))
    x = rng.standard_normal((n, 1))
    eps = 2.0 * rng.standard_normal((n, 1))
    assert np.array_equal(sample.z, z)
    assert np.array_equal(sample.x, x)
    assert np.array_equal(sample.y, -z + z**3 + 1.5 * x + eps)


def test_generate_sine_equation():
    model = ModelSpec(b=0.0, f_kind="sine", c=0.25)
    sample = generate(model, 32, _philox(78))
    rng = _philox(78)
    z = rng.standard_normal((32, 1))
    x = rng.standard_normal((32, 1))
    eps = 2.0 * rng.standard_normal((32, 1))
    assert np.array_equal(sample.y, -z + np.sin(0.25 * np.pi * x) + eps)


def test_null_models_coincide_across_f_kinds():
    # c = 0 makes the linear and sine models literally the same process.
    m1 = ModelSpec(b=0.0, f_kind="linear", c=0.0)
    m2 = ModelSpec(b=0.0, f_kind="sine", c=0.0)
    s1 = generate(m1, 50, _philox(3))
    s2 = generate(m2, 50, _philox(3))
    assert np.array_equal(s1.y, s2.y)
    assert np.array_equal(s1.x, s2.x)
    assert np.array_equal(s1.z, s2.z)


def test_generate_moments_large_sample():
    model = ModelSpec(b=0.0, f_kind="linear", c=0.0)
    n = 100_000
    sample = generate(model, n, _philox(999))
    assert abs(sample.z.mean()) < 3 / np.sqrt(n)
    eps = sample.y + sample.z  # b = 0, c = 0, so eps is exactly y + z
    assert abs(eps.var() - 4.0) < 0.05 * 4.0


def test_generate_rejects_tiny_n():
    with pytest.raises(ValueError):
        generate(ModelSpec(b=0.0, f_kind="linear", c=0.0), 3, _philox(1))


def test_profiles():
    assert PROFILES["desk"].replications == 200
    assert PROFILES["desk"].num_permutations == 199
    assert PROFILES["paper"].replications == 1000
    assert PROFILES["paper"].num_permutations == 500
    assert DEFAULT_N_GRID == (20, 30, 50, 70, 100)
    assert DEFAULT_ALPHAS == (0.05, 0.1)


def _tiny_grid(**overrides):
    kwargs = dict(
        models=[ModelSpec(b=0.0, f_kind="linear", c=1.5)],
        n_grid=(20,),
        alphas=(0.05,),
        replications=8,
        num_permutations=19,
        tests=("linmdd",),
        seed=515,
    )
    kwargs.update(overrides)
    return run_grid(**kwargs)


def test_run_grid_row_schema_and_rate_identity():
    table = _tiny_grid(tests=("linmdd", "partial_f", "mdd"), alphas=(0.05, 0.1))
    assert len(table) == 6  # 1 model x 1 n x 2 alphas x 3 tests
    for row in table:
        assert row.rate == row.rejections / row.replications
        assert row.test in ("linmdd", "partial-f", "mdd")
        assert row.seed == 515
        assert row.model_id == 1 and row.b == 0.0 and row.f_kind == "linear"


def test_run_grid_single_replication_rates_are_zero_or_one():
    table = _tiny_grid(replications=1, tests=("linmdd", "partial-f"))
    assert {row.rate for row in table} <= {0.0, 1.0}


def test_run_grid_is_deterministic_across_threads():
    kwargs = dict(replications=10, tests=("linmdd", "mdd"))
    assert _tiny_grid(**kwargs, threads=1) == _tiny_grid(**kwargs, threads=4)


def test_run_grid_cells_do_not_interfere():
    # Adding tests, sample sizes, or alphas must not change existing cells.
    base = _tiny_grid()
    more_tests = _tiny_grid(tests=("linmdd", "mdd"))
    assert more_tests.lookup(1, 1.5, 20, 0.05, "linmdd") == base.rows[0]
    more_n = _tiny_grid(n_grid=(20, 30))
    assert more_n.lookup(1, 1.5, 20, 0.05, "linmdd") == base.rows[0]
    more_alpha = _tiny_grid(alphas=(0.05, 0.1))
    assert more_alpha.lookup(1, 1.5, 20, 0.05, "linmdd") == base.rows[0]


def test_run_grid_requires_seed_and_valid_tests():
    with pytest.raises(ValueError):
        _tiny_grid(seed=None)
    with pytest.raises(ValueError):
        _tiny_grid(tests=("linmdd", "pcov"))
    with pytest.raises(ValueError):
        _tiny_grid(replications=0)


def test_figure_one_grid_row_count():
    table = run_grid(
        catalog((1, 2)),
        replications=1,
        num_permutations=5,
        tests=("linmdd",),
        seed=1,
    )
    # 7 model points x 5 sample sizes x 2 alphas x 1 test
    assert len(table) == 70


def test_emit_and_read_csv_round_trip(tmp_path):
    table = _tiny_grid(tests=("linmdd", "partial-f"), alphas=(0.05, 0.1))
    path = tmp_path / "grid.csv"
    emit_table(table, "csv", path)
    assert read_table(path) == table


def test_emit_and_read_json_round_trip(tmp_path):
    table = _tiny_grid(tests=("linmdd", "mdd"))
    path = tmp_path / "grid.json"
    emit_table(table, "json", path)
    assert read_table(path) == table


def test_emit_empty_table_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_table(PowerTable(rows=()), "csv", path)
    text = path.read_text()
    assert text.splitlines() == [
        "model_id,b,f_kind,c,n,alpha,test,replications,rejections,rate,stderr,seed"
    ]
    assert read_table(path) == PowerTable(rows=())


def test_emit_is_byte_stable(tmp_path):
    table = _tiny_grid()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_table(table, "csv", a)
    emit_table(table, "csv", b)
    assert a.read_bytes() == b.read_bytes()


def test_read_table_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("model,b\n1,0\n")
    with pytest.raises(InputFormatError, match="header"):
        read_table(path)


def test_read_table_rejects_short_row(tmp_path):
    table = _tiny_grid()
    path = tmp_path / "short.csv"
    emit_table(table, "csv", path)
    lines = path.read_text().splitlines()
    lines.append("1,0.0,linear")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InputFormatError, match="row 3"):
        read_table(path)


def test_read_table_rejects_bad_value(tmp_path):
    table = _tiny_grid()
    path = tmp_path / "bad_value.csv"
    emit_table(table, "csv", path)
    path.write_text(path.read_text().replace(",515", ",fifteen"))
    with pytest.raises(InputFormatError, match="seed"):
        read_table(path)


def test_lookup_missing_cell():
    with pytest.raises(KeyError):
        _tiny_grid().lookup(2, 0.25, 20, 0.05, "linmdd")


def test_power_row_from_counts():
    model = ModelSpec(b=0.0, f_kind="linear", c=1.0)
    row = PowerRow.from_counts(model, 50, 0.05, "linmdd", 200, 50, seed=9)
    assert row.rate == 0.25
    assert row.stderr == pytest.approx(np.sqrt(0.25 * 0.75 / 200))
