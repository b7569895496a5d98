#pragma once

#include "warpspec/errors.hpp"
#include "warpspec/quadrature.hpp"
#include "warpspec/geometry.hpp"
#include "warpspec/profile.hpp"
#include "warpspec/reduction.hpp"
#include "warpspec/forms.hpp"
#include "warpspec/spectrum.hpp"
#include "warpspec/criteria.hpp"
