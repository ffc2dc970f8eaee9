#include "afrisynth/numerals.hpp"

#include <regex>

#include "afrisynth/error.hpp"
#include "afrisynth/util.hpp"

namespace afrisynth {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (static_cast<unsigned char>(c) >= 0x80);
}

std::size_t digits_at(std::string_view t, std::size_t j) {
    std::size_t n = 0;
    while (j + n < t.size() && is_digit(t[j + n])) ++n;
    return n;
}

std::string strip_leading_zeros(std::string s) {
    const auto nz = s.find_first_not_of('0');
    if (nz == std::string::npos) return "0";
    return s.substr(nz);
}

}  // namespace

std::string fold_digits(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    const auto u = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    for (std::size_t i = 0; i < text.size();) {
        if (i + 1 < text.size()) {
            const unsigned char a = u(i), b = u(i + 1);
            if (a == 0xD9 && b >= 0xA0 && b <= 0xA9) {  // U+0660..0669
                out.push_back(static_cast<char>('0' + (b - 0xA0)));
                i += 2;
                continue;
            }
            if (a == 0xDB && b >= 0xB0 && b <= 0xB9) {  // U+06F0..06F9
                out.push_back(static_cast<char>('0' + (b - 0xB0)));
                i += 2;
                continue;
            }
            if (a == 0xD9 && b == 0xAB) { out.push_back('.'); i += 2; continue; }  // U+066B
            if (a == 0xD9 && b == 0xAC) { out.push_back(','); i += 2; continue; }  // U+066C
            if (a == 0xC2 && b == 0xA0) { out.push_back(' '); i += 2; continue; }  // NBSP
        }
        if (i + 2 < text.size() && u(i) == 0xE2) {
            const unsigned char b = u(i + 1), c = u(i + 2);
            if (b == 0x88 && c == 0x92) { out.push_back('-'); i += 3; continue; }  // U+2212
            if (b == 0x80 && (c == 0xAF || c == 0x89)) { out.push_back(' '); i += 3; continue; }
        }
        out.push_back(text[i++]);
    }
    return out;
}

std::vector<NumberToken> scan_numbers(std::string_view input) {
    const std::string folded = fold_digits(input);
    const std::string_view t = folded;
    std::vector<NumberToken> tokens;

    std::size_t i = 0;
    while (i < t.size()) {
        if (!is_digit(t[i])) {
            ++i;
            continue;
        }
        NumberToken tok;
        std::size_t begin = i;
        bool negative = false;
        if (i > 0 && t[i - 1] == '-' && (i < 2 || (!is_alnum(t[i - 2]) && t[i - 2] != ')'))) {
            negative = true;
            begin = i - 1;
        }

        std::size_t j = i;
        std::size_t lead = digits_at(t, j);
        std::string int_digits(t.substr(j, lead));
        j += lead;

        // digit grouping
        char group_sep = 0;
        if (lead <= 3) {
            while (j < t.size()) {
                const char c = t[j];
                const bool candidate = (c == ',' || c == ' ' || c == '\'') && (group_sep == 0 || c == group_sep);
                if (!candidate || digits_at(t, j + 1) != 3) break;
                group_sep = c;
                int_digits.append(t.substr(j + 1, 3));
                j += 4;
            }
        }

        std::string frac_digits;
        std::string denominator;
        bool has_decimal = false;
        if (j + 1 < t.size() && (t[j] == '.' || (t[j] == ',' && group_sep != ',')) && is_digit(t[j + 1])) {
            const std::size_t n = digits_at(t, j + 1);
            frac_digits = std::string(t.substr(j + 1, n));
            has_decimal = true;
            j += 1 + n;
        } else if (group_sep == 0 && j + 1 < t.size() && t[j] == '/' && is_digit(t[j + 1])) {
            const std::size_t n = digits_at(t, j + 1);
            denominator = std::string(t.substr(j + 1, n));
            tok.is_fraction = true;
            j += 1 + n;
        }

        tok.begin = begin;
        tok.end = j;
        tok.raw = std::string(t.substr(begin, j - begin));
        tok.digit_runs.push_back(int_digits);
        if (has_decimal) tok.digit_runs.push_back(frac_digits);
        if (tok.is_fraction) tok.digit_runs.push_back(denominator);

        std::string norm = strip_leading_zeros(int_digits);
        if (tok.is_fraction) {
            norm += "/" + strip_leading_zeros(denominator);
        } else if (has_decimal) {
            const auto last = frac_digits.find_last_not_of('0');
            if (last != std::string::npos) norm += "." + frac_digits.substr(0, last + 1);
        }
        const bool is_zero = norm.find_first_not_of("0./") == std::string::npos && !tok.is_fraction;
        if (negative && !is_zero) norm.insert(norm.begin(), '-');
        tok.normalized = std::move(norm);

        tokens.push_back(std::move(tok));
        i = j;
    }
    return tokens;
}

std::optional<std::string> single_number(std::string_view text) {
    const auto tokens = scan_numbers(text);
    if (tokens.size() != 1 || tokens.front().is_fraction) return std::nullopt;
    return tokens.front().normalized;
}

std::vector<std::string> digit_sequences(std::string_view text) {
    std::vector<std::string> runs;
    for (auto& tok : scan_numbers(text)) {
        for (auto& r : tok.digit_runs) runs.push_back(std::move(r));
    }
    return runs;
}

std::string extract_final_answer(std::string_view solution_text) {
    std::string_view last_line;
    std::size_t pos = 0;
    while (pos <= solution_text.size()) {
        auto nl = solution_text.find('\n', pos);
        if (nl == std::string_view::npos) nl = solution_text.size();
        const auto line = solution_text.substr(pos, nl - pos);
        if (!trim(line).empty()) last_line = line;
        pos = nl + 1;
    }
    auto tokens = scan_numbers(last_line);
    if (tokens.empty()) tokens = scan_numbers(solution_text);
    if (tokens.empty()) throw Error(ErrorKind::NoNumberFound, "solution contains no number");
    return tokens.back().normalized;
}

bool response_contains_answer(std::string_view response, std::string_view answer) {
    if (answer.empty()) return false;
    if (response.find(answer) != std::string_view::npos) return true;
    for (const auto& tok : scan_numbers(response)) {
        if (tok.normalized == answer) return true;
    }
    return false;
}

std::size_t count_arithmetic_lines(std::string_view text) {
    static const std::regex op(R"([0-9)]\s*(?:[-+*/x=]|×|÷)\s*[0-9(])");
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string line(text.substr(pos, nl - pos));
        if (std::regex_search(line, op)) ++count;
        pos = nl + 1;
    }
    return count;
}

}  // namespace afrisynth
