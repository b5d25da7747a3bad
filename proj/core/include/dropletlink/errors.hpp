/// Exception taxonomy for the receiver chain. All conditions a caller can
/// reasonably catch and handle have their own type; everything derives from
/// dropletlink::Error.
#pragma once

#include <stdexcept>
#include <string>

namespace dropletlink {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Two droplet occupancy windows collide at a sensor; the schedule is too
/// dense for the configured speed.
class OverlapError : public Error {
  public:
    using Error::Error;
};

/// Baseline window holds too few samples for a stable offset estimate.
class WindowTooShortError : public Error {
  public:
    using Error::Error;
};

/// No rising edge found and no expected bit count was supplied.
class NoSignalError : public Error {
  public:
    using Error::Error;
};

class LengthMismatchError : public Error {
  public:
    using Error::Error;
};

/// A spectral channel's no-droplet level is zero; ratios are undefined.
class ZeroBaselineError : public Error {
  public:
    using Error::Error;
};

class EmptyWindowError : public Error {
  public:
    using Error::Error;
};

class EmptyLibraryError : public Error {
  public:
    using Error::Error;
};

/// Every usable spectral channel is saturated; concentration cannot be
/// recovered from the signature.
class UnidentifiableError : public Error {
  public:
    using Error::Error;
};

class NoPulseError : public Error {
  public:
    using Error::Error;
};

/// More than one disjoint above-half-maximum run; segment before measuring.
class AmbiguousPulseError : public Error {
  public:
    using Error::Error;
};

/// Droplet counts differ between the two sensors (or the cross-sensor delay
/// has the wrong sign for the configured orientation).
class UnmatchedDropletError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file; message carries the 1-based line number.
class FormatError : public Error {
  public:
    using Error::Error;
};

class NonUniformSamplingError : public Error {
  public:
    using Error::Error;
};

class ChannelCountMismatchError : public Error {
  public:
    using Error::Error;
};

/// An experiment-level assertion failed (e.g. nonzero BER where zero was
/// required). The CLI maps this to its own exit code.
class ExperimentAssertionError : public Error {
  public:
    using Error::Error;
};

}  // namespace dropletlink
