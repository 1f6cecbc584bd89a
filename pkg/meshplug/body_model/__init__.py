"""
Parametric body model grouped by concern.

Submodules:
- `spec`: BodyModelSpec, its invariants and JSON I/O
- `params`: BodyParams and Mesh value types
- `lbs`: forward pass and forward-mode Jacobian
- `toy`: the bundled 8-joint test body
- `obj`: Wavefront OBJ export
"""
from .spec import NUM_BETAS, BodyModelSpec, body_spec_from_dict, load_body_spec, save_body_spec, validate_body_spec
from .params import BodyParams, Mesh, load_params, load_params_list, save_params
from .lbs import lbs_forward, lbs_jacobian, parameter_count, regress_joints, root_pivot, shaped_vertices
from .toy import JOINT_NAMES, toy_body_spec
from .obj import read_obj, write_obj

__all__ = [
    "NUM_BETAS",
    "BodyModelSpec",
    "BodyParams",
    "Mesh",
    "load_params",
    "load_params_list",
    "save_params",
    "body_spec_from_dict",
    "load_body_spec",
    "save_body_spec",
    "validate_body_spec",
    "lbs_forward",
    "lbs_jacobian",
    "parameter_count",
    "regress_joints",
    "root_pivot",
    "shaped_vertices",
    "JOINT_NAMES",
    "toy_body_spec",
    "read_obj",
    "write_obj",
]
