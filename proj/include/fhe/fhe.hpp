#pragma once

// Umbrella header for the whole library.

#include "fhe/bfv.hpp"
#include "fhe/bgv.hpp"
#include "fhe/ckks.hpp"
#include "fhe/decomposition.hpp"
#include "fhe/error.hpp"
#include "fhe/glwe.hpp"
#include "fhe/modular.hpp"
#include "fhe/ring.hpp"
#include "fhe/rns.hpp"
#include "fhe/tfhe.hpp"
#include "fhe/tfhe_engine.hpp"
#include "fhe/transform.hpp"
