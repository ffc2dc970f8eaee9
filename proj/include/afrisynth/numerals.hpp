#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace afrisynth {

/// A number found in free text. Offsets index the ASCII-folded text.
struct NumberToken {
    std::string raw;         // as written (after digit folding)
    std::string normalized;  // group separators removed, '.' decimal, no leading/trailing zeros
    std::vector<std::string> digit_runs;  // maximal digit sequences with grouping removed
    bool is_fraction = false;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Maps Arabic-Indic and Extended Arabic-Indic digits to ASCII, the Arabic
/// decimal/thousands marks to '.'/',', U+2212 to '-', and no-break/thin
/// spaces to ' '. Everything else is copied through.
std::string fold_digits(std::string_view text);

/// Scans `text` (folded first) for numbers. Grouping: ',' ' ' or '\'' followed
/// by exactly three digits, when the leading group has at most three digits.
/// Decimal mark: '.' or a ',' that is not a group separator. "a/b" with plain
/// integers on both sides is kept as one fraction token.
std::vector<NumberToken> scan_numbers(std::string_view text);

/// The single non-fraction number in `text`, normalized; nullopt if the text
/// holds zero, several, or a fraction.
std::optional<std::string> single_number(std::string_view text);

/// Maximal digit sequences of `text` after group-separator removal.
std::vector<std::string> digit_sequences(std::string_view text);

/// Final answer of a step-by-step solution: the last number on the last
/// non-empty line, else the last number anywhere. Throws NoNumberFound.
std::string extract_final_answer(std::string_view solution_text);

/// True when `answer` is a raw substring of `response` or equals the
/// normalized form of some number in it.
bool response_contains_answer(std::string_view response, std::string_view answer);

/// Lines containing an arithmetic operator between operands; a rough proxy
/// for solution step count, reported as metadata only.
std::size_t count_arithmetic_lines(std::string_view text);

}  // namespace afrisynth
