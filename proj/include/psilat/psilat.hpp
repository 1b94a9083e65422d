#pragma once
// Umbrella header.

#include "psilat/errors.hpp"
#include "psilat/field.hpp"
#include "psilat/local_ring.hpp"
#include "psilat/lubin_tate.hpp"
#include "psilat/series.hpp"
#include "psilat/laurent.hpp"
#include "psilat/linalg.hpp"
#include "psilat/phigamma.hpp"
#include "psilat/lattice.hpp"
#include "psilat/monomial_engine.hpp"
#include "psilat/presentation.hpp"
#include "psilat/dual.hpp"
#include "psilat/corpus.hpp"
#include "psilat/json_io.hpp"
