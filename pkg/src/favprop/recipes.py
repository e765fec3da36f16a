"""Built-in experiment recipes.

Each recipe is a complete TOML config; ``favprop explain <name>`` prints it
so it can be saved and edited.
"""
from __future__ import annotations

from .config import ExperimentConfig, parse_config
from .errors import ConfigurationError

_THEOREM1 = """\
experiment_name = "theorem1-diagonal-gap"
description = "Same-path steering terms (1/M) w_r^H w_r stay at 1 for every M"
master_seed = 1001
trials = 64
m_values = [1, 16, 256, 4096]

[ensembles.random_aoa]
L = 3
gain_model = "iid-complex-gaussian"
aoa_model = "uniform"
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[ensembles.fixed_aoa]
L = 3
gain_model = "iid-complex-gaussian"
aoas = [0.0, 0.3, -0.7]
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[ensembles.counterexample]
L = 3
gain_model = "counterexample"
geometry = { kind = "uniform-linear", M = 16 }

[[metrics]]
name = "cross_terms_random_aoa"
kind = "cross_terms"
ensemble = "random_aoa"
checks = [{ type = "diagonal-unit", tol = 1e-9 }]

[[metrics]]
name = "cross_terms_fixed_aoa"
kind = "cross_terms"
ensemble = "fixed_aoa"
checks = [{ type = "diagonal-unit", tol = 1e-9 }]

[[metrics]]
name = "cross_terms_counterexample"
kind = "cross_terms"
ensemble = "counterexample"
checks = [{ type = "diagonal-unit", tol = 1e-9 }]

[[metrics]]
name = "normalization_random_aoa"
kind = "normalization"
ensemble = "random_aoa"
checks = [{ type = "passes" }]

[[metrics]]
name = "diag_term_sweep"
kind = "cross_term"
ensemble = "fixed_aoa"
paths = [1, 1]
checks = [{ type = "equals", value = 1.0, tol = 1e-9 }]

[[metrics]]
name = "offdiag_term_sweep"
kind = "cross_term"
ensemble = "fixed_aoa"
paths = [0, 1]
m_values = [16, 256, 4096]
"""

_PROP1 = """\
experiment_name = "prop1-sweep"
description = "Zero-mean per-path user correlation plus vanishing r != s steering terms drive E{z} to 0"
master_seed = 1002
trials = 10000
m_values = [16, 64, 256, 1024]

[ensembles.shifted]
L = 2
K = 2
gain_model = "path-shifted"
variance = 1.0
aoas = [0.0, 0.3]
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[ensembles.iid]
L = 2
K = 2
gain_model = "iid-complex-gaussian"
variance = 1.0
aoas = [0.0, 0.3]
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[[metrics]]
name = "mean_z_shifted"
kind = "mean_z"
ensemble = "shifted"
checks = [{ type = "decreasing", k = 4.0 }]

[[metrics]]
name = "cross_term_01"
kind = "cross_term"
ensemble = "shifted"
paths = [0, 1]
checks = [{ type = "slope-at-most", value = -0.9 }]

[[metrics]]
name = "cross_term_00"
kind = "cross_term"
ensemble = "shifted"
paths = [0, 0]
checks = [{ type = "equals", value = 1.0, tol = 1e-9 }]

[[metrics]]
name = "decomposition_shifted"
kind = "decomposition"
ensemble = "shifted"
m_values = [16, 1024]
checks = [{ type = "consistent", tol = 1e-12 }, { type = "diag-zero-mean", k = 4.0 }]

[[metrics]]
name = "mean_z_iid"
kind = "mean_z"
ensemble = "iid"
checks = [{ type = "zero-mean", k = 4.0 }]
"""

_COUNTEREXAMPLE = """\
experiment_name = "counterexample-audit"
description = "Rademacher counter-example: E{z} = L^2 against a claimed bound of L; complex ordering"
master_seed = 1003
trials = 2000

[ensembles.counterexample]
L = 3
gain_model = "counterexample"
geometry = { kind = "uniform-linear", M = 5 }

[ensembles.random_aoa_bounded]
L = 3
K = 2
gain_model = "rademacher"
aoa_model = "uniform"
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[ensembles.shifted_unit_phase]
L = 3
K = 2
gain_model = "path-shifted"
gain_distribution = "unit-phase"
aoas = [0.0, 0.3, 0.7]
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[[metrics]]
name = "audit"
kind = "counterexample_audit"
ensemble = "counterexample"
m_values = [1, 5, 7, 64]
checks = [{ type = "violation" }]

[[metrics]]
name = "bound_rhs_random_aoa"
kind = "bound_rhs"
ensemble = "random_aoa_bounded"
m_values = [16, 64]
trials = 10000
checks = [{ type = "imag-significant", k = 10.0 }]

[[metrics]]
name = "complex_ordering"
kind = "complex_ordering"
ensemble = "shifted_unit_phase"
m_values = [16]
trials = 40000
checks = [{ type = "lhs-nonreal", k = 10.0 }]
"""

_PROP2 = """\
experiment_name = "prop2-zero-mean"
description = "Factorized gains a_r b_i with AoA-coupled a_r: E{z} = 0 at every finite M"
master_seed = 1004
trials = 10000
m_values = [8, 64, 512]

[ensembles.factorized]
L = 2
K = 2
gain_model = "factorized"
coupling = "shared-aoa"
aoa_model = "uniform"
user_factor = { kind = "complex-gaussian", scale = 1.0 }
geometry = { kind = "uniform-linear", M = 64, spacing = 0.5 }

[[metrics]]
name = "mean_z"
kind = "mean_z"
ensemble = "factorized"
checks = [{ type = "zero-mean", k = 4.0 }]
"""

_FOOTNOTE = """\
experiment_name = "footnote1-separation"
description = "Zero-mean z that never gets small: orthogonality on average without favorable propagation"
master_seed = 1005
trials = 10000
m_values = [16, 256]
eps = [0.5]

[ensembles.footnote]
type = "synthetic"
values = [1.0, -1.0]

[ensembles.unit_factorized]
L = 1
K = 2
gain_model = "factorized"
path_factors = ["1"]
user_factor = { kind = "unit-phase", scale = 1.0 }
aoas = [0.2]
geometry = { kind = "uniform-linear", M = 16, spacing = 0.5 }

[[metrics]]
name = "mean_z_footnote"
kind = "mean_z"
ensemble = "footnote"
checks = [{ type = "zero-mean", k = 4.0 }]

[[metrics]]
name = "tail_footnote"
kind = "tail_prob"
ensemble = "footnote"
eps = 0.5
checks = [{ type = "at-least", value = 0.99 }]

[[metrics]]
name = "mean_z_unit_factorized"
kind = "mean_z"
ensemble = "unit_factorized"
checks = [{ type = "zero-mean", k = 4.0 }]

[[metrics]]
name = "tail_unit_factorized"
kind = "tail_prob"
ensemble = "unit_factorized"
eps = 0.5
checks = [{ type = "at-least", value = 0.99 }]
"""

_COSINE = """\
experiment_name = "cosine-demo"
description = "Cosine of the angle between real vectors and its 1/M form under norm sqrt(M)"
master_seed = 1006
trials = 2

[[metrics]]
name = "cosine"
kind = "cosine"
checks = [{ type = "matches", tol = 1e-12 }]
cases = [
  { a = [1.0, 1.0, 1.0, 1.0], b = [1.0, 1.0, 1.0, 1.0], expected = 1.0 },
  { a = [1.0, 1.0], b = [1.0, -1.0], expected = 0.0 },
  { a = [1.0, 0.0], b = [1.0, 1.0], expected = 0.7071067811865476 },
  { a = [1.0, 1.0, 1.0, 1.0], b = [1.0, -1.0, 1.0, 1.0], expected = 0.5 },
  { a = [1.0, -1.0, 1.0, -1.0], b = [1.0, 1.0, -1.0, -1.0], expected = 0.0 },
]
"""

RECIPES = {
    "theorem1-diagonal-gap": ("Same-path steering terms stay at 1 for every M", _THEOREM1),
    "prop1-sweep": ("E{z} and the r != s steering terms shrink as M grows", _PROP1),
    "counterexample-audit": ("Exact counter-example E{z} = L^2 vs bound L; complex ordering",
                             _COUNTEREXAMPLE),
    "prop2-zero-mean": ("Factorized gains give E{z} = 0 at finite M", _PROP2),
    "footnote1-separation": ("Zero mean without convergence: tail probability stays at 1",
                             _FOOTNOTE),
    "cosine-demo": ("Cosine similarity and the 1/M orthogonality form", _COSINE),
}


def list_recipes() -> dict[str, str]:
    """Recipe name -> one-line description."""
    return {name: desc for name, (desc, _) in RECIPES.items()}


def recipe_text(name: str) -> str:
    if name not in RECIPES:
        raise ConfigurationError(f"unknown recipe {name!r}; known: {', '.join(RECIPES)}")
    return RECIPES[name][1]


def load_recipe(name: str) -> ExperimentConfig:
    return parse_config(recipe_text(name))
