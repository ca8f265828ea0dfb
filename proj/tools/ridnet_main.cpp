// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "cli.hpp"
#include "ridnet/parallel.hpp"

int main(int argc, char** argv) {
  try {
    ridnet::configure_threads_from_env();
  } catch (const std::exception& e) {
    std::cerr << "ridnet: " << e.what() << "\n";
    return ridnet::cli::kConfig;
  }
  return ridnet::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
