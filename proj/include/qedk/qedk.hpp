#pragma once

// Mode-evolution kernels, coupling spectra, and consistency checks for the
// quantized electromagnetic field in linear dispersive media.

#include "qedk/check_report.hpp"
#include "qedk/coupling.hpp"
#include "qedk/errors.hpp"
#include "qedk/field.hpp"
#include "qedk/frequency_grid.hpp"
#include "qedk/kernels.hpp"
#include "qedk/kk.hpp"
#include "qedk/laplace.hpp"
#include "qedk/medium.hpp"
#include "qedk/oscillatory.hpp"
#include "qedk/polynomial.hpp"
#include "qedk/scenario.hpp"
#include "qedk/spline.hpp"
