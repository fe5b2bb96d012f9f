#pragma once

#include <stdexcept>
#include <string>

namespace geomine {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mapped column is missing, a dimension names an unknown column, etc.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Strict-mode validation failure (malformed row, unresolved place).
class DataError : public Error {
public:
    using Error::Error;
};

/// Gazetteer structure violations and failed hierarchy lookups.
class HierarchyError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or configuration documents.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace geomine
