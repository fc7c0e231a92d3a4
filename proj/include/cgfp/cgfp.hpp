#pragma once

#include "cgfp/bigfloat.hpp"
#include "cgfp/bounds.hpp"
#include "cgfp/cg.hpp"
#include "cgfp/diagnostics.hpp"
#include "cgfp/errors.hpp"
#include "cgfp/hiprec.hpp"
#include "cgfp/linalg.hpp"
#include "cgfp/matio.hpp"
#include "cgfp/rng.hpp"
#include "cgfp/serialize.hpp"
#include "cgfp/spd.hpp"
#include "cgfp/tridiag.hpp"
