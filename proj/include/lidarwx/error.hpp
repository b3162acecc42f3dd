#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lidarwx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised by the binary frame reader. `offset` is the byte position at which
// the problem was detected.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class TruncatedFile : public FormatError {
 public:
  TruncatedFile(std::uint64_t offset, std::uint64_t expected, std::uint64_t actual)
      : FormatError("truncated file: expected at least " + std::to_string(expected) +
                        " bytes, file holds " + std::to_string(actual),
                    offset),
        expected_(expected),
        actual_(actual) {}

  std::uint64_t expected_length() const noexcept { return expected_; }
  std::uint64_t actual_length() const noexcept { return actual_; }

 private:
  std::uint64_t expected_;
  std::uint64_t actual_;
};

// Split request that cannot keep every class on both sides.
class InfeasibleSplit : public Error {
 public:
  using Error::Error;
};

class SvmNotConverged : public Error {
 public:
  SvmNotConverged(int class_a, int class_b, long iterations, double kkt_gap)
      : Error("SVM solver for class pair (" + std::to_string(class_a) + "," +
              std::to_string(class_b) + ") did not converge after " +
              std::to_string(iterations) + " iterations, KKT gap " + std::to_string(kkt_gap)),
        iterations_(iterations),
        kkt_gap_(kkt_gap) {}

  long iterations() const noexcept { return iterations_; }
  double kkt_gap() const noexcept { return kkt_gap_; }

 private:
  long iterations_;
  double kkt_gap_;
};

}  // namespace lidarwx
