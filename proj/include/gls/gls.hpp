#pragma once

#include "model.hpp"
#include "spectral.hpp"
#include "linesearch.hpp"
#include "block_descent.hpp"
#include "sls.hpp"
#include "ssls.hpp"
#include "diagnostics.hpp"
#include "oracle.hpp"
#include "simgen.hpp"
#include "io.hpp"
