"""LOCAL-model simulator and node-averaged LCL solvers on bounded-degree trees."""

__version__ = "0.1.0"
