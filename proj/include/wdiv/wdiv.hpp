#pragma once

#include "wdiv/dense.hpp"
#include "wdiv/error.hpp"
#include "wdiv/poly_matrix.hpp"
#include "wdiv/poly_parse.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/rates.hpp"
#include "wdiv/report.hpp"
#include "wdiv/restriction.hpp"
#include "wdiv/scalar.hpp"
#include "wdiv/simulate.hpp"
#include "wdiv/spec_file.hpp"
#include "wdiv/stats.hpp"
#include "wdiv/verify.hpp"
