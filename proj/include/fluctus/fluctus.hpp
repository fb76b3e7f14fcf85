#pragma once

#include "fluctus/matrix_core.hpp"
#include "fluctus/algebra.hpp"
#include "fluctus/spectral_triple.hpp"
#include "fluctus/perturbation.hpp"
#include "fluctus/sampling.hpp"
#include "fluctus/toy_model.hpp"
#include "fluctus/action.hpp"
#include "fluctus/morita.hpp"
#include "fluctus/io.hpp"
#include "fluctus/commands.hpp"
