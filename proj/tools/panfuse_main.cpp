// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "panfuse/cli.hpp"

int main(int argc, char** argv) { return panfuse::cli_main(argc, argv, std::cout, std::cerr); }
