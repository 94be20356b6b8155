#pragma once

#include <gtest/gtest.h>

#include "fhe/error.hpp"

// Expects stmt to throw fhe::Error carrying the given code.
#define EXPECT_THROW_CODE(stmt, expected)                                \
  do {                                                                   \
    try {                                                                \
      (void)(stmt);                                                      \
      ADD_FAILURE() << "no exception from " #stmt;                       \
    } catch (const fhe::Error& e_) {                                     \
      EXPECT_EQ(e_.code(), expected) << fhe::to_string(e_.code());       \
    }                                                                    \
  } while (0)
