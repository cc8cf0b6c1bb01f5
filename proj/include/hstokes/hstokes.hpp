#pragma once

#include "hstokes/analysis.hpp"
#include "hstokes/cases.hpp"
#include "hstokes/cli.hpp"
#include "hstokes/config.hpp"
#include "hstokes/differentiation.hpp"
#include "hstokes/error.hpp"
#include "hstokes/extension.hpp"
#include "hstokes/fft.hpp"
#include "hstokes/field.hpp"
#include "hstokes/grid.hpp"
#include "hstokes/io.hpp"
#include "hstokes/kernels.hpp"
#include "hstokes/navier_stokes.hpp"
#include "hstokes/oracle.hpp"
#include "hstokes/parallel.hpp"
#include "hstokes/quadrature.hpp"
#include "hstokes/spectral.hpp"
#include "hstokes/stokes.hpp"
