#pragma once

#include <stdexcept>
#include <string>

namespace eigenmatch {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed mesh file; carries the 1-based line number where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Mesh violates a discretization requirement (zero-area face, non-manifold
// edge, zero-length edge). Carries the offending face index when known.
class DegenerateMeshError : public Error {
 public:
  DegenerateMeshError(const std::string& what, long face = -1)
      : Error(face >= 0 ? what + " (face " + std::to_string(face) + ")" : what),
        face_(face) {}
  long face() const { return face_; }

 private:
  long face_;
};

class DisconnectedMeshError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class MeshMismatchError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class DegenerateStatisticsError : public Error {
 public:
  using Error::Error;
};

class EmptyCandidateError : public Error {
 public:
  using Error::Error;
};

// Filesystem / container format problems outside mesh parsing.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eigenmatch
