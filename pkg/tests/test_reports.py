"""
Bergman Toolkit - Reports and Sampling Tests
Verification records, JSON-lines output, summaries and the random polynomial model
"""

from fractions import Fraction

import pytest
from pydantic import ValidationError

from bergman_toolkit.moments import PiMultiple
from bergman_toolkit.polycore import ExactComplex, parse_polynomial
from bergman_toolkit.reports import (
    VerificationReport,
    exact_json,
    holds,
    kind_of,
    read_jsonl,
    summarize,
    write_jsonl,
    write_summary,
)
from bergman_toolkit.sampling import RandomPolyModel, generate_polynomial, rationalize, trial_seeds


@pytest.fixture
def reports():
    return [
        VerificationReport.build("prop-2.1", Fraction(1, 3), Fraction(1, 3), True, ratio=Fraction(1)),
        VerificationReport.build("prop-2.1", Fraction(1, 4), Fraction(1, 3), True, ratio=Fraction(3, 4)),
        VerificationReport.build("lemma-3.1", 2.0, 1.0, False, ratio=2.0, scalar_kind="float"),
    ]


class TestVerificationReport:
    """Test cases for report construction and rendering"""

    def test_exact_values_keep_rational_form(self):
        report = VerificationReport.build("lemma-2.3-1", PiMultiple(Fraction(1, 6), 2), Fraction(1, 3), True)
        assert report.lhs == {"rational": "1/6", "pi_power": 2, "float": pytest.approx(9.8696044 / 6)}
        assert report.rhs["rational"] == "1/3"
        assert report.rhs_float == pytest.approx(1 / 3)

    def test_parameters_render_polynomials(self):
        p = parse_polynomial("z1*z2", 2)
        report = VerificationReport.build("prop-2.4", 0.1, 0.2, True, parameters={"p": p, "z": [1j]})
        assert report.parameters == {"p": "z1*z2", "z": [{"re": 0.0, "im": 1.0}]}

    def test_json_line_is_stable(self):
        a = VerificationReport.build("prop-2.1", Fraction(1, 2), Fraction(1, 2), True)
        b = VerificationReport.build("prop-2.1", Fraction(1, 2), Fraction(1, 2), True)
        assert a.to_json_line() == b.to_json_line()
        assert "\n" not in a.to_json_line()

    def test_exact_json_of_complex_scalar(self):
        rendered = exact_json(ExactComplex(1, Fraction(-1, 2)))
        assert rendered["im"]["rational"] == "-1/2"


class TestComparisons:
    """Test cases for exact and float inequality checks"""

    def test_exact(self):
        assert holds(Fraction(1, 3), Fraction(1, 3), exact=True)
        assert not holds(Fraction(1, 2), Fraction(1, 3), exact=True)

    def test_float_tolerance(self):
        assert holds(1.0 + 1e-12, 1.0, exact=False)
        assert not holds(1.001, 1.0, exact=False)

    def test_kind_of(self):
        assert kind_of(Fraction(1), PiMultiple(Fraction(1), 1)) == "exact"
        assert kind_of(Fraction(1), 0.5) == "float"
        assert kind_of(PiMultiple(0.5, 1)) == "float"


class TestOutputs:
    """Test cases for JSON-lines files and summaries"""

    def test_jsonl_round_trip(self, tmp_path, reports):
        path = write_jsonl(reports + [{"trial_id": 3, "error": "boom", "passed": False}], tmp_path / "r.jsonl")
        records = read_jsonl(path)
        assert len(records) == 4
        assert records[0]["claim_id"] == "prop-2.1"
        assert records[3]["error"] == "boom"

    def test_summary_per_claim(self, reports):
        summary = summarize([r.model_dump(mode="json") for r in reports]).set_index("claim_id")
        assert summary.loc["prop-2.1", "trials"] == 2
        assert summary.loc["prop-2.1", "pass_rate"] == 1.0
        assert summary.loc["prop-2.1", "max_ratio"] == pytest.approx(1.0)
        assert summary.loc["lemma-3.1", "passed"] == 0

    def test_summary_skips_error_records(self):
        assert summarize([{"trial_id": 0, "error": "x", "passed": False}]).empty

    def test_summary_csv(self, tmp_path, reports):
        path = tmp_path / "out" / "summary.csv"
        write_summary([r.model_dump(mode="json") for r in reports], path)
        assert path.read_text().splitlines()[0] == "claim_id,trials,passed,pass_rate,max_ratio,min_ratio,max_constant"


class TestRandomPolynomials:
    """Test cases for the seeded random polynomial model"""

    def test_same_seed_same_polynomial(self):
        model = RandomPolyModel(n=2, degree=3, sparsity="sparse")
        assert generate_polynomial(model, 5) == generate_polynomial(model, 5)

    def test_dense_support(self):
        p = generate_polynomial(RandomPolyModel(n=2, degree=3), 1)
        assert len(p.terms) == 10
        assert p.degree == 3
        assert p.kind == "exact"

    def test_constant_is_nonzero(self):
        p = generate_polynomial(RandomPolyModel(n=3, degree=0), 9)
        assert p.degree == 0
        assert not p.is_zero()

    def test_sparse_keeps_top_degree(self):
        for seed in range(10):
            p = generate_polynomial(RandomPolyModel(n=2, degree=4, sparsity="sparse", density=0.1), seed)
            assert p.degree == 4

    def test_coefficients_on_dyadic_grid(self):
        p = generate_polynomial(RandomPolyModel(n=1, degree=2), 3)
        for c in p.terms.values():
            assert (1 << 24) % c.re.denominator == 0
            assert abs(complex(c)) <= 1.0 + 2 ** -23

    def test_literal_survives_parsing(self):
        p = generate_polynomial(RandomPolyModel(n=2, degree=2), 4)
        assert parse_polynomial(p.to_literal(), 2) == p

    def test_rationalize(self):
        assert rationalize(0.5, bits=4) == Fraction(1, 2)
        assert rationalize(0.3, bits=2) == Fraction(1, 4)

    def test_trial_seeds_deterministic_and_distinct(self):
        seeds = trial_seeds(20240101, 8)
        assert seeds == trial_seeds(20240101, 8)
        assert len(set(seeds)) == 8

    def test_invalid_model(self):
        with pytest.raises(ValidationError):
            RandomPolyModel(n=0, degree=2)
