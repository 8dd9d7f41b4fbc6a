#include <pybind11/pybind11.h>

PYBIND11_MODULE(detexpy, m) { m.doc() = "placeholder"; }
