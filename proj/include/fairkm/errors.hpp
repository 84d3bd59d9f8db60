#pragma once

#include <stdexcept>
#include <string>

namespace fairkm {

// Base for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Malformed data or arguments (bad shapes, non-finite values, ...).
class InvalidInput : public Error
{
public:
  using Error::Error;
};

// No assignment satisfies the fairness targets together with non-emptiness.
class InfeasibleTarget : public Error
{
public:
  using Error::Error;
};

// A valid request the chosen algorithm cannot serve (e.g. flow with two sensitive features).
class UnsupportedConfiguration : public Error
{
public:
  using Error::Error;
};

// The first flow stage could not populate every center within the repeat cap.
class FirstStageDegenerate : public Error
{
public:
  using Error::Error;
};

// The assignment search hit its time or node cap before finding any feasible assignment.
class TimeCapNoIncumbent : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

}  // namespace fairkm
