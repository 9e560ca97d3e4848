#pragma once

#include <stdexcept>
#include <string>

namespace sdfilter {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A face whose cross product is negligible relative to its edge lengths.
class DegenerateFaceError : public Error {
 public:
  explicit DegenerateFaceError(int face)
      : Error("degenerate face " + std::to_string(face)), face_(face) {}
  int face() const { return face_; }

 private:
  int face_;
};

/// An iterative or direct linear solve that did not reach its target.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace sdfilter
