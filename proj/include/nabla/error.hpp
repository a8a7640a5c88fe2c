#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nabla
{

// Every error raised by the library derives from nabla::Error so callers
// (the CLI in particular) can separate domain failures from usage errors.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error
{
    std::size_t _line;
    std::size_t _column;

public:
    SyntaxError( const std::string& what, std::size_t line, std::size_t column )
            : Error( std::to_string( line ) + ":" + std::to_string( column ) + ": " + what ),
              _line{ line }, _column{ column }
    {
    }

    [[nodiscard]] std::size_t line() const { return _line; }
    [[nodiscard]] std::size_t column() const { return _column; }
};

class UnboundVariable : public Error { using Error::Error; };
class NegatedVariable : public Error { using Error::Error; };
class UnguardedVariable : public Error { using Error::Error; };
class NotSigmaFragment : public Error { using Error::Error; };
class ZeroHasNoPred : public Error { using Error::Error; };
class UnknownState : public Error { using Error::Error; };
class InvalidParameter : public Error { using Error::Error; };
class ForeignFormula : public Error { using Error::Error; };
class ExtractionFailure : public Error { using Error::Error; };
class RootSetMismatch : public Error { using Error::Error; };
class NotATreeState : public Error { using Error::Error; };
class TranslationFailure : public Error { using Error::Error; };

} // namespace nabla
