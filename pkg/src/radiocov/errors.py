"""Exception hierarchy shared across the package.

Every error carries a short machine-readable ``code`` that the CLI prints
on stderr and the HTTP service maps to a status code.
"""


class RadiocovError(Exception):
    code = "error"


class InvalidRegionError(RadiocovError):
    code = "invalid-region"


class PlacementError(RadiocovError):
    code = "placement-failure"


class SceneParseError(RadiocovError):
    code = "scene-parse"


class InvalidSceneError(RadiocovError):
    code = "invalid-scene"


class FormatError(RadiocovError):
    code = "bad-format"


class ContractViolation(RadiocovError):
    code = "contract-violation"


class EmptyDatasetError(RadiocovError):
    code = "empty-dataset"


class EmptySplitError(RadiocovError):
    code = "empty-split"


class NumericError(RadiocovError):
    code = "numeric"
