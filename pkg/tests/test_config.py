import pytest

from kinex import ConfigError, RunConfig, parse_config
from kinex.savings import Constant, Imitation, MoneyDependent, QuenchedUniform, Urn

MINIMAL_CC = """
# homogeneous market
model = cc
lambda = 0.5
"""


class TestParsing:
    def test_minimal_cc_fills_defaults(self):
        cfg = parse_config(MINIMAL_CC)
        assert cfg.model == "cc"
        assert cfg.lam == 0.5
        assert cfg.n_agents == 100
        assert cfg.n_trades == 1_000_000
        assert cfg.burn_in == 500_000
        assert cfg.snapshot_every == 100
        assert cfg.n_snapshots == 1000
        assert cfg.seed == 0

    def test_comments_blanks_and_underscores(self):
        cfg = parse_config(
            "model = ccm\n"
            "\n"
            "n_trades = 1_000_000  # one sweep per agent pair\n"
            "seed = 1e4\n"
        )
        assert cfg.n_trades == 1_000_000
        assert cfg.seed == 10_000

    def test_unknown_key_suggestion(self):
        with pytest.raises(ConfigError, match=r"line 2.*'lamda'.*did you mean 'lambda'"):
            parse_config("model = cc\nlamda = 0.5\n")

    def test_parse_error_carries_line_number(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("model = cc\nlambda = 0.5\nnot a statement\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("model = cc\nlambda = 0.5\nlambda = 0.7\n")

    def test_bad_value_reported(self):
        with pytest.raises(ConfigError, match=r"line 2.*n_trades"):
            parse_config("model = cc\nn_trades = soon\nlambda = 0.1\n")

    def test_missing_model(self):
        with pytest.raises(ConfigError, match="model"):
            parse_config("lambda = 0.5\n")

    def test_overrides_win(self):
        cfg = parse_config(MINIMAL_CC, seed=99, output_dir="elsewhere")
        assert cfg.seed == 99
        assert cfg.output_dir == "elsewhere"


class TestValidation:
    def test_schedule_overrun_names_invariant(self):
        with pytest.raises(ConfigError, match="n_snapshots.*burn_in"):
            parse_config(
                "model = cc\nlambda = 0.5\nn_trades = 1000\n"
                "burn_in = 500\nsnapshot_every = 10\nn_snapshots = 100\n"
            )

    def test_model_param_required(self):
        with pytest.raises(ConfigError, match=r"cc.*lambda"):
            parse_config("model = cc\n")
        with pytest.raises(ConfigError, match=r"c1"):
            parse_config("model = selforg_increasing\nc2 = 1\n")
        with pytest.raises(ConfigError, match=r"polya"):
            parse_config("model = polya\na = 1\n")

    def test_stray_model_param_rejected(self):
        with pytest.raises(ConfigError, match="does not use"):
            parse_config("model = ccm\nlambda = 0.4\n")

    def test_unknown_model_suggestion(self):
        with pytest.raises(ConfigError, match="did you mean 'polya'"):
            RunConfig(model="poyla", a=1.0, b=1.0)

    @pytest.mark.parametrize(
        "text,field",
        [
            ("model = cc\nlambda = 1.5\n", "lambda"),
            ("model = cc\nlambda = 0.5\nn_agents = 1\n", "n_agents"),
            ("model = selforg_decreasing\nc1 = 1.0\nc2 = 1\n", "c1"),
            ("model = selforg_decreasing\nc1 = 0.9\nc2 = 0\n", "c2"),
            ("model = polya\na = 0\nb = 1\n", "a"),
            ("model = polya\na = 1\nb = 1\nwarmup = 0\n", "warmup"),
            ("model = cc\nlambda = 0.5\nseed = -1\n", "seed"),
        ],
    )
    def test_field_violations_name_the_field(self, text, field):
        with pytest.raises(ConfigError, match=field):
            parse_config(text)

    def test_zero_trade_polya_allowed(self):
        cfg = parse_config("model = polya\na = 1\nb = 1\nn_trades = 0\n")
        assert cfg.n_trades == 0
        assert cfg.n_snapshots == 0
        assert cfg.warmup == 10_000


class TestRuleConstruction:
    @pytest.mark.parametrize(
        "kwargs,rule_type",
        [
            (dict(model="cc", lam=0.3), Constant),
            (dict(model="ccm"), QuenchedUniform),
            (dict(model="selforg_decreasing", c1=0.9, c2=2.0), MoneyDependent),
            (dict(model="selforg_increasing", c1=0.9, c2=2.0), MoneyDependent),
            (dict(model="polya", a=4.0, b=2.0), Urn),
            (dict(model="imitation"), Imitation),
        ],
    )
    def test_rule_round_trip(self, kwargs, rule_type):
        rule = RunConfig(**kwargs).rule()
        assert isinstance(rule, rule_type)

    def test_to_dict_includes_model_params(self):
        d = RunConfig(model="polya", a=4.0, b=2.0).to_dict()
        assert d["a"] == 4.0 and d["b"] == 2.0 and d["warmup"] == 10_000
        d = RunConfig(model="cc", lam=0.1).to_dict()
        assert d["lambda"] == 0.1
