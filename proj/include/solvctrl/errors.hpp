#pragma once

#include <stdexcept>
#include <string>

namespace solvctrl {

/// A named structural hypothesis of the input failed (the computation is
/// refused, not approximated). The name is stable and machine-readable,
/// e.g. "not-solvable", "n0-not-trivial", "det-gap-too-small".
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// A numerical procedure could not certify its result within tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::string name, const std::string& what, double residual = 0.0)
      : std::runtime_error(name + ": " + what),
        name_(std::move(name)),
        residual_(residual) {}
  const std::string& name() const { return name_; }
  double residual() const { return residual_; }

 private:
  std::string name_;
  double residual_;
};

/// Malformed system-definition file.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace solvctrl
