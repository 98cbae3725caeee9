#include "confine/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace confine {

namespace {

using nlohmann::json;

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    TomlDocument document() {
        TomlDocument doc;
        std::vector<std::string> table;
        std::map<std::string, bool> explicit_tables;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            int line = line_;
            if (peek() == '[') {
                ++pos_;
                if (peek() == '[') fail("arrays of tables are not supported");
                skip_ws();
                table = key_path();
                skip_ws();
                expect(']');
                end_of_line();
                std::string name = join(table);
                if (explicit_tables[name]) fail("table [" + name + "] defined twice", line);
                explicit_tables[name] = true;
                json* node = &doc.root;
                std::string path;
                for (const auto& k : table) {
                    path = path.empty() ? k : path + "." + k;
                    if (!node->contains(k)) {
                        (*node)[k] = json::object();
                        doc.lines.emplace(path, line);
                    } else if (!(*node)[k].is_object()) {
                        fail("'" + path + "' is already a value", line);
                    }
                    node = &(*node)[k];
                }
                continue;
            }
            std::vector<std::string> key = key_path();
            skip_ws();
            expect('=');
            skip_ws();
            json value = parse_value();
            end_of_line();

            json* node = &doc.root;
            std::string path;
            for (const auto& k : table) {
                path = path.empty() ? k : path + "." + k;
                node = &(*node)[k];
            }
            for (std::size_t i = 0; i < key.size(); ++i) {
                const auto& k = key[i];
                path = path.empty() ? k : path + "." + k;
                bool last = i + 1 == key.size();
                if (last) {
                    if (node->contains(k)) fail("duplicate key '" + path + "'", line);
                    (*node)[k] = std::move(value);
                    doc.lines.emplace(path, line);
                } else {
                    if (!node->contains(k)) {
                        (*node)[k] = json::object();
                        doc.lines.emplace(path, line);
                    } else if (!(*node)[k].is_object()) {
                        fail("'" + path + "' is already a value", line);
                    }
                    node = &(*node)[k];
                }
            }
        }
        return doc;
    }

    json single_value() {
        skip_ws();
        json v = parse_value();
        skip_ws();
        if (!eof()) fail("unexpected text after value");
        return v;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }

    [[noreturn]] void fail(const std::string& msg, int line = -1) const {
        throw ConfigError(msg, line < 0 ? line_ : line);
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }

    void newline() {
        if (peek() == '\r') ++pos_;
        if (peek() == '\n') {
            ++pos_;
            ++line_;
        }
    }

    void skip_blank_lines() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r')
                newline();
            else
                break;
        }
    }

    void end_of_line() {
        skip_ws();
        skip_comment();
        if (eof()) return;
        if (peek() != '\n' && peek() != '\r') fail("expected end of line");
        newline();
    }

    static std::string join(const std::vector<std::string>& parts) {
        std::string out;
        for (const auto& p : parts) out += out.empty() ? p : "." + p;
        return out;
    }

    static bool bare_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::vector<std::string> key_path() {
        std::vector<std::string> parts;
        while (true) {
            skip_ws();
            if (peek() == '"') {
                parts.push_back(basic_string());
            } else if (peek() == '\'') {
                parts.push_back(literal_string());
            } else {
                std::size_t start = pos_;
                while (!eof() && bare_char(peek())) ++pos_;
                if (pos_ == start) fail("expected a key");
                parts.push_back(s_.substr(start, pos_ - start));
            }
            skip_ws();
            if (peek() != '.') break;
            ++pos_;
        }
        return parts;
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (eof()) fail("unterminated string");
            char e = s_[pos_++];
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                default: fail(std::string("unsupported escape \\") + e);
            }
        }
        return out;
    }

    std::string literal_string() {
        expect('\'');
        std::size_t start = pos_;
        while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
        if (peek() != '\'') fail("unterminated string");
        std::string out = s_.substr(start, pos_ - start);
        ++pos_;
        return out;
    }

    // whitespace, newlines and comments inside arrays
    void skip_array_space() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r')
                newline();
            else
                break;
        }
    }

    json parse_value() {
        char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '{') fail("inline tables are not supported");
        if (c == '[') {
            ++pos_;
            json arr = json::array();
            skip_array_space();
            while (peek() != ']') {
                arr.push_back(parse_value());
                skip_array_space();
                if (peek() == ',') {
                    ++pos_;
                    skip_array_space();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            ++pos_;
            return arr;
        }
        std::size_t start = pos_;
        while (!eof() && (bare_char(peek()) || peek() == '+' || peek() == '.')) ++pos_;
        std::string tok = s_.substr(start, pos_ - start);
        if (tok.empty()) fail("expected a value");
        if (tok == "true") return true;
        if (tok == "false") return false;
        return number(tok);
    }

    json number(std::string tok) const {
        std::string t;
        for (std::size_t i = 0; i < tok.size(); ++i) {
            if (tok[i] == '_') {
                bool ok = i > 0 && i + 1 < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i - 1])) &&
                          std::isdigit(static_cast<unsigned char>(tok[i + 1]));
                if (!ok) fail("misplaced '_' in number '" + tok + "'");
                continue;
            }
            t += tok[i];
        }
        std::string body = (t[0] == '+' || t[0] == '-') ? t.substr(1) : t;
        double sign = t[0] == '-' ? -1.0 : 1.0;
        if (body == "inf") return sign * std::numeric_limits<double>::infinity();
        if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (body.empty() || !std::isdigit(static_cast<unsigned char>(body[0])))
            fail("invalid value '" + tok + "'");
        bool integer = body.find_first_of(".eE") == std::string::npos;
        const char* b = t.c_str();
        char* end = nullptr;
        if (integer) {
            long long v = std::strtoll(b, &end, 10);
            if (*end != '\0') fail("invalid integer '" + tok + "'");
            return v;
        }
        double v = std::strtod(b, &end);
        if (*end != '\0') fail("invalid number '" + tok + "'");
        return v;
    }
};

}  // namespace

int TomlDocument::line_of(const std::string& path) const {
    auto it = lines.find(path);
    return it == lines.end() ? 0 : it->second;
}

TomlDocument parse_toml(const std::string& text) { return Parser(text).document(); }

nlohmann::json parse_toml_value(const std::string& text) { return Parser(text).single_value(); }

}  // namespace confine
