#pragma once

#include <stdexcept>
#include <string>

namespace voleta {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Malformed mesh, JSON, or image content. The message names the line or byte offset.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Paired rasters (frame/depth/mask) disagree in size.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Geometry too degenerate to fit a rigid transform.
class IllConditioned : public Error {
public:
    using Error::Error;
};

/// Image has the wrong pixel format (e.g. 8-bit where 16-bit depth is required).
class FormatError : public Error {
public:
    using Error::Error;
};

class EmptySceneError : public Error {
public:
    using Error::Error;
};

[[noreturn]] void throw_invalid(const std::string& what);

} // namespace voleta
