#pragma once

#include "spiked/auxiliary.hpp"
#include "spiked/enumeration.hpp"
#include "spiked/error.hpp"
#include "spiked/io.hpp"
#include "spiked/mmse.hpp"
#include "spiked/parallel.hpp"
#include "spiked/prior.hpp"
#include "spiked/quadrature.hpp"
#include "spiked/rng.hpp"
#include "spiked/spin_glass.hpp"
#include "spiked/tensor.hpp"
#include "spiked/threshold.hpp"
#include "spiked/validate.hpp"
#include "spiked/version.hpp"
