"""config_loader.py

Module Containing Brief Functions for Validating and Parsing Experiment Specs

"""
import hashlib
import logging
from pathlib import Path

import yamale
import yaml

from .errors import SpecValidationError

logger = logging.getLogger(__name__)

DEFAULT_SCHEMA_PATH = Path(__file__).resolve().parent.parent / "config" / "schema.yaml"


def validate_yaml_schema(config_path, schema_path=DEFAULT_SCHEMA_PATH, content=None):
    """Validates YAML Spec File Against Schema

    Parameters
    ----------
    config_path : str or Path
        Name / Path to the Experiment Spec File, or a Label When content Is Given
    schema_path : str or Path
        Name / Path to the schema.yaml File
    content : str, optional
        YAML Text Validated in Place of the File

    Returns
    -------
    bool
        If the Yamale Validates Properly
    """
    schema = yamale.make_schema(str(schema_path))
    if content is None:
        data = yamale.make_data(str(config_path))
    else:
        data = yamale.make_data(content=content)
    try:
        yamale.validate(schema, data)
    except yamale.YamaleError as err:
        for result in err.results:
            for error in result.errors:
                logger.error("spec %s: %s", config_path, error)
        return False
    return True


def load_yaml(config_path):
    """Parses a YAML File

    Parameters
    ----------
    config_path : str or Path
        Name / Path to the YAML File

    Returns
    -------
    config : dict
        Dictionary containing the parsed document
    """
    with open(config_path) as file:
        # The FullLoader parameter handles the conversion from YAML
        # scalar values to Python the dictionary format
        config = yaml.load(file, Loader=yaml.FullLoader)
        return config


def spec_content_hash(config_path):
    """SHA-256 Hex Digest of the Raw Spec File Bytes"""
    return hashlib.sha256(Path(config_path).read_bytes()).hexdigest()


def load_experiment_spec(config_path, schema_path=DEFAULT_SCHEMA_PATH):
    """Validates then Loads an Experiment Spec

    Parameters
    ----------
    config_path : str or Path
        Name / Path to the Experiment Spec File
    schema_path : str or Path
        Name / Path to the schema.yaml File

    Returns
    -------
    dict
        Parsed spec, with an added "SPEC_HASH" entry

    Raises
    ------
    SpecValidationError
        If the file is missing or does not validate
    """
    config_path = Path(config_path)
    if not config_path.is_file():
        raise SpecValidationError(f"Spec file not found: {config_path}")
    if not Path(schema_path).is_file():
        raise SpecValidationError(f"Schema file not found: {schema_path}")
    if not validate_yaml_schema(config_path, schema_path):
        raise SpecValidationError(f"Spec file {config_path} did not validate against its schema")
    spec = load_yaml(config_path)
    _check_names(spec)
    spec["SPEC_HASH"] = spec_content_hash(config_path)
    return spec


def _check_names(spec):
    names = [experiment["name"] for experiment in spec["EXPERIMENTS"]]
    if len(names) != len(set(names)):
        raise SpecValidationError("Experiment names must be unique")


def build_experiment_spec(spec, label="<command line>", schema_path=DEFAULT_SCHEMA_PATH):
    """Validates an In-Memory Spec Against the Same Schema as a Spec File

    Returns
    -------
    dict
        The spec, with "SPEC_HASH" Taken over Its Canonical YAML Dump

    Raises
    ------
    SpecValidationError
        If the spec does not validate
    """
    content = yaml.safe_dump(spec, sort_keys=True)
    if not validate_yaml_schema(label, schema_path, content=content):
        raise SpecValidationError(f"Spec {label} did not validate against its schema")
    _check_names(spec)
    spec = dict(spec)
    spec["SPEC_HASH"] = hashlib.sha256(content.encode()).hexdigest()
    return spec
