"""Python access to the kslab thresholds, coefficient checks and solver."""

try:
    from . import _kslab
except ImportError:  # in-tree build: the extension sits on PYTHONPATH on its own
    import _kslab

globals().update({k: v for k, v in vars(_kslab).items() if not k.startswith("__")})
__version__ = _kslab.__version__
