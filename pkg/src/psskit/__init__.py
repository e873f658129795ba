"""psskit: verification toolkit for PDEs describing pseudospherical surfaces.

Layered as:

* ``jetalg``    exact symbolic algebra on jet coordinates,
* ``cartan``    differential forms and structure-equation residuals,
* ``families``  the classified PDE families and their checkers,
* ``chmatch``   coefficient matcher recovering family parameters,
* ``immersion`` second-fundamental-form coefficients and certificates,
* ``bonnet``    concrete solutions, frame integration, mesh export,
* ``cli``       command-line entry point (``psskit`` script).
"""

__version__ = "0.1.0"

from .jetalg import (JetExpr, PDESpec, diff_wrt, is_zero, parse_expr, render,
                     total_dt, total_dx)
from .cartan import (OneForm, TwoForm, delta, exterior_d, fundamental_forms,
                     independence_witness, structure_residuals, wedge)
from .families import (FamilyInstance, FamilyParams, build_family,
                       default_params, lemma21_check, verify_pss)
from .chmatch import match_family, match_generalized_ch
from .immersion import (BOdeProblem, ClosedFormSFF, certificate_sweep,
                        codazzi_residuals, gauss_residual,
                        nonexistence_certificate, sff_closed_form,
                        solve_b_ode, strip_domain)
from .bonnet import (SolutionSampler, SurfaceMesh, discrete_curvature,
                     export_mesh, integrate_frame, sg_kink, sine_gordon_abc,
                     traveling_wave)

__all__ = [
    "__version__", "JetExpr", "PDESpec", "diff_wrt", "is_zero", "parse_expr",
    "render", "total_dt", "total_dx", "OneForm", "TwoForm", "delta",
    "exterior_d", "fundamental_forms", "independence_witness",
    "structure_residuals", "wedge", "FamilyInstance", "FamilyParams",
    "build_family", "default_params", "lemma21_check", "verify_pss",
    "match_family", "match_generalized_ch", "BOdeProblem", "ClosedFormSFF",
    "certificate_sweep", "codazzi_residuals", "gauss_residual",
    "nonexistence_certificate", "sff_closed_form", "solve_b_ode",
    "strip_domain", "SolutionSampler", "SurfaceMesh", "discrete_curvature",
    "export_mesh", "integrate_frame", "sg_kink", "sine_gordon_abc",
    "traveling_wave",
]
