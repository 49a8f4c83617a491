// Copyright 2026 The PopSweeper Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates tests/data/synthetic_corpus: make_synthetic_corpus <dir>

#include <iostream>

#include "support/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_synthetic_corpus <output-dir>\n";
    return 2;
  }
  const auto corpus = popsweeper::testing::build_synthetic_corpus();
  popsweeper::testing::write_synthetic_corpus(corpus, argv[1]);
  std::cout << corpus.manifest.size() << " frames written to " << argv[1] << '\n';
  return 0;
}
