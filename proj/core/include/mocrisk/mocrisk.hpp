#pragma once

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/design.hpp"
#include "mocrisk/errors.hpp"
#include "mocrisk/estimation.hpp"
#include "mocrisk/hypothesis.hpp"
#include "mocrisk/io.hpp"
#include "mocrisk/model.hpp"
#include "mocrisk/rng.hpp"
#include "mocrisk/simulation.hpp"
#include "mocrisk/version.hpp"
