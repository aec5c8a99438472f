// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

// Writes the ten-blob test corpus and its mock fixture into a directory.

#include <iostream>

#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_blob_corpus <dir>\n";
    return 2;
  }
  const auto corpus = emopro::testing::make_blob_corpus(argv[1]);
  std::cout << corpus.manifest.string() << '\n' << corpus.fixture.string() << '\n';
  return 0;
}
