#pragma once

#include "dsplit/errors.hpp"
#include "dsplit/parallel.hpp"
#include "dsplit/grid.hpp"
#include "dsplit/boundary.hpp"
#include "dsplit/tridiag.hpp"
#include "dsplit/operators.hpp"
#include "dsplit/physics.hpp"
#include "dsplit/scheme.hpp"
#include "dsplit/verification.hpp"
#include "dsplit/cases.hpp"
#include "dsplit/io.hpp"
#include "dsplit/config.hpp"
#include "dsplit/selftest.hpp"
