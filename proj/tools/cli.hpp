#pragma once

#include "coarse/serialize.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace coarse::cli {

enum Exit : int { kOk = 0, kViolation = 2, kInputError = 3 };

struct RunConfig {
  std::string command;  // gen, cover, tower, trees, embed, report, verify, pipeline
  std::filesystem::path input;
  std::filesystem::path output_dir = "out";
  // space: a grid when --extent is given, otherwise a free-group ball
  Norm metric = Norm::L1;
  int dim = 1;
  std::optional<int> extent;
  std::optional<int> rank;
  std::optional<int> radius;
  // scales
  std::optional<std::size_t> colors;  // defaults to the seed's color count
  int levels = 3;
  Rational d0{5, 2};
  Rational block{6};
  std::uint64_t seed = 1;
  std::size_t max_points = kDefaultMaxPoints;
  unsigned workers = 1;
};

/// Validates limits; Error(InvalidArgument) on a bad config.
void validate(const RunConfig& config);

/// Runs one command, writing artifacts under output_dir and appending one
/// line to output_dir/summary.jsonl. Returns the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a RunConfig and runs it.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace coarse::cli
