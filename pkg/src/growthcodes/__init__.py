"""Growth codes: encoding, peeling decoders, ODE analysis and JSCC rate allocation."""

__version__ = "0.1.0"
