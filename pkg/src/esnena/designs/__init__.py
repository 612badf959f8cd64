import importlib
from pkgutil import iter_modules

from esnena.exceptions import EsnEnaImplementationError, EsnEnaModuleError
from esnena.globals import design_types_info, design_types_modules


def build_design_dict():
    for design_module_info in iter_modules(__path__):
        module_name = f"esnena.designs.{design_module_info.name}.{design_module_info.name}"
        try:
            design_module = importlib.import_module(module_name)
        except ModuleNotFoundError:
            raise EsnEnaModuleError(module_name)
        try:
            design_type = design_module.Design.design_type()
        except AttributeError:
            raise EsnEnaImplementationError(module_name, "Does not subclass AbstractDesign.")
        except TypeError as e:
            raise EsnEnaImplementationError(module_name, str(e))
        design_types_info[design_module_info.name] = design_type
        design_types_modules[design_module_info.name] = design_module


def get_design_module(design_type: str):
    if not design_types_modules:
        build_design_dict()
    try:
        return design_types_modules[design_type]
    except KeyError:
        raise EsnEnaModuleError(f"esnena.designs.{design_type}", f"Known designs: {sorted(design_types_modules)}.")
