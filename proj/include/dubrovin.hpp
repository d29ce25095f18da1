#pragma once

#include "dubrovin/abel.hpp"
#include "dubrovin/approx.hpp"
#include "dubrovin/errors.hpp"
#include "dubrovin/flows.hpp"
#include "dubrovin/gapset.hpp"
#include "dubrovin/integrator.hpp"
#include "dubrovin/oracle.hpp"
#include "dubrovin/quadrature.hpp"
#include "dubrovin/reconstruct.hpp"
#include "dubrovin/rng.hpp"
#include "dubrovin/torus.hpp"
