/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
