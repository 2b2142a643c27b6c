#pragma once

#include <stdexcept>
#include <string>

namespace wxpipe {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonInvertibleScript : public Error {
 public:
  using Error::Error;
};

class NoIndicContent : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class InvalidOrder : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class AlignmentMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyReference : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class DegenerateAlphabet : public Error {
 public:
  using Error::Error;
};

}  // namespace wxpipe
