// cpmasa.hpp: umbrella header

#pragma once

#include "cpmasa/errors.hpp"
#include "cpmasa/linalg.hpp"
#include "cpmasa/random.hpp"
#include "cpmasa/cpmaps.hpp"
#include "cpmasa/gksl.hpp"
#include "cpmasa/masa.hpp"
#include "cpmasa/search.hpp"
#include "cpmasa/corpus.hpp"
#include "cpmasa/io.hpp"
