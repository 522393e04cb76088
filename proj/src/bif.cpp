#include "bnv/bif.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "bnv/errors.hpp"

namespace bnv {

namespace {

struct Token {
    enum Kind { Word, Number, Punct, End } kind;
    std::string text;
    int line;
    int column;
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_space_and_comments();
        if (pos_ >= text_.size()) return {Token::End, "", line_, column_};
        int line = line_, column = column_;
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '_' || text_[pos_] == '-' ||
                                           text_[pos_] == '.'))
                word += take();
            return {Token::Word, word, line, column};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
            std::string num;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                    text_[pos_] == '-' || text_[pos_] == '+' || text_[pos_] == 'e' ||
                    text_[pos_] == 'E'))
                num += take();
            return {Token::Number, num, line, column};
        }
        if (std::string("{}()[]|,;").find(c) != std::string::npos)
            return {Token::Punct, std::string(1, take()), line, column};
        throw ParseError(std::string("unexpected character '") + c + "'", line, column);
    }

  private:
    char take() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') take();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

class Parser {
  public:
    explicit Parser(const std::string& text) : lexer_(text) { advance(); }

    BayesianNetwork parse(const std::string& outcome_name) {
        expect_word("network");
        if (current_.kind == Token::Word) advance();  // network name, optional
        skip_block();

        BayesianNetwork net;
        std::map<std::string, int> ids;
        while (current_.kind != Token::End) {
            if (current_.kind != Token::Word)
                throw ParseError("expected 'variable' or 'probability' block", current_.line,
                                 current_.column);
            if (current_.text == "variable") {
                advance();
                parse_variable(net, ids);
            } else if (current_.text == "probability") {
                advance();
                parse_probability(net, ids);
            } else {
                throw ParseError("unknown block '" + current_.text + "'", current_.line,
                                 current_.column);
            }
        }

        auto it = ids.find(outcome_name);
        if (it == ids.end())
            throw SemanticError("outcome variable '" + outcome_name + "' not found in BIF input");
        net.outcome = it->second;

        // Blocks may appear in any order; CPT slots were sized up front.
        for (int v = 0; v < net.var_count(); ++v)
            if (net.cpts[v].child == -1)
                throw SemanticError("no probability block for '" + net.variables[v].name + "'");

        validate(net);
        return net;
    }

  private:
    void parse_variable(BayesianNetwork& net, std::map<std::string, int>& ids) {
        std::string name = expect_name();
        expect_punct("{");
        expect_word("type");
        expect_word("discrete");
        expect_punct("[");
        Token card = current_;
        expect_number();
        expect_punct("]");
        expect_punct("{");
        Variable var;
        var.name = name;
        while (!accept_punct("}")) {
            var.value_labels.push_back(expect_name_or_number());
            accept_punct(",");
        }
        accept_punct(";");
        expect_punct("}");

        if (std::to_string(var.cardinality()) != card.text)
            throw SemanticError("variable '" + name + "' declares cardinality " + card.text +
                                " but lists " + std::to_string(var.cardinality()) + " values");
        if (!ids.emplace(name, net.var_count()).second)
            throw SemanticError("variable '" + name + "' declared twice");
        net.variables.push_back(var);
        net.cpts.emplace_back();  // filled by the probability block
    }

    void parse_probability(BayesianNetwork& net, std::map<std::string, int>& ids) {
        expect_punct("(");
        int child = lookup(ids, expect_name());
        Cpt cpt;
        cpt.child = child;
        if (accept_punct("|")) {
            do {
                cpt.parents.push_back(lookup(ids, expect_name()));
            } while (accept_punct(","));
        }
        expect_punct(")");
        expect_punct("{");

        if (net.cpts[child].child != -1)
            throw SemanticError("second probability block for '" + net.variables[child].name +
                                "'");
        for (int p : cpt.parents) net.edges.emplace_back(p, child);

        long long row_count = 1;
        for (int p : cpt.parents) row_count *= net.variables[p].cardinality();
        cpt.rows.assign(row_count, {});

        while (!accept_punct("}")) {
            if (current_.kind == Token::Word && current_.text == "table") {
                advance();
                if (!cpt.parents.empty())
                    throw ParseError("'table' entry in a conditional probability block",
                                     current_.line, current_.column);
                cpt.rows[0] = parse_number_list();
                expect_punct(";");
            } else if (current_.kind == Token::Word && current_.text == "property") {
                skip_statement();
            } else {
                expect_punct("(");
                int row = 0;
                for (size_t i = 0; i < cpt.parents.size(); ++i) {
                    if (i > 0) expect_punct(",");
                    int parent = cpt.parents[i];
                    std::string label = expect_name_or_number();
                    int value = value_index(net.variables[parent], label);
                    if (value < 0)
                        throw SemanticError("unknown value '" + label + "' for parent '" +
                                            net.variables[parent].name + "'");
                    row = row * net.variables[parent].cardinality() + value;
                }
                expect_punct(")");
                if (!cpt.rows[row].empty())
                    throw SemanticError("duplicate CPT row for '" + net.variables[child].name +
                                        "'");
                cpt.rows[row] = parse_number_list();
                expect_punct(";");
            }
        }

        for (const auto& row : cpt.rows)
            if (row.empty())
                throw SemanticError("CPT of '" + net.variables[child].name +
                                    "' is missing a parent-value row");
        net.cpts[child] = std::move(cpt);
    }

    std::vector<double> parse_number_list() {
        std::vector<double> values;
        do {
            Token t = current_;
            expect_number();
            try {
                values.push_back(std::stod(t.text));
            } catch (const std::exception&) {
                throw ParseError("bad number '" + t.text + "'", t.line, t.column);
            }
        } while (accept_punct(","));
        return values;
    }

    static int value_index(const Variable& var, const std::string& label) {
        for (int i = 0; i < var.cardinality(); ++i)
            if (var.value_labels[i] == label) return i;
        return -1;
    }

    int lookup(const std::map<std::string, int>& ids, const std::string& name) {
        auto it = ids.find(name);
        if (it == ids.end())
            throw SemanticError("reference to undeclared variable '" + name + "'");
        return it->second;
    }

    void skip_block() {
        expect_punct("{");
        int depth = 1;
        while (depth > 0) {
            if (current_.kind == Token::End)
                throw ParseError("unterminated block", current_.line, current_.column);
            if (current_.kind == Token::Punct && current_.text == "{") ++depth;
            if (current_.kind == Token::Punct && current_.text == "}") --depth;
            advance();
        }
    }

    void skip_statement() {
        while (!(current_.kind == Token::Punct && current_.text == ";")) {
            if (current_.kind == Token::End)
                throw ParseError("unterminated statement", current_.line, current_.column);
            advance();
        }
        advance();
    }

    void advance() { current_ = lexer_.next(); }

    std::string expect_name() {
        if (current_.kind != Token::Word)
            throw ParseError("expected an identifier, found '" + current_.text + "'",
                             current_.line, current_.column);
        std::string s = current_.text;
        advance();
        return s;
    }

    std::string expect_name_or_number() {
        if (current_.kind != Token::Word && current_.kind != Token::Number)
            throw ParseError("expected a value label, found '" + current_.text + "'",
                             current_.line, current_.column);
        std::string s = current_.text;
        advance();
        return s;
    }

    void expect_number() {
        if (current_.kind != Token::Number)
            throw ParseError("expected a number, found '" + current_.text + "'", current_.line,
                             current_.column);
        advance();
    }

    void expect_word(const std::string& w) {
        if (current_.kind != Token::Word || current_.text != w)
            throw ParseError("expected '" + w + "', found '" + current_.text + "'", current_.line,
                             current_.column);
        advance();
    }

    void expect_punct(const std::string& p) {
        if (current_.kind != Token::Punct || current_.text != p)
            throw ParseError("expected '" + p + "', found '" + current_.text + "'", current_.line,
                             current_.column);
        advance();
    }

    bool accept_punct(const std::string& p) {
        if (current_.kind == Token::Punct && current_.text == p) {
            advance();
            return true;
        }
        return false;
    }

    Lexer lexer_;
    Token current_;
};

void write_number(std::ostream& out, double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    out << s.str();
}

}  // namespace

BayesianNetwork parse_bif(const std::string& text, const std::string& outcome_name) {
    return Parser(text).parse(outcome_name);
}

std::string to_bif(const BayesianNetwork& net) {
    std::ostringstream out;
    out << "network unknown {\n}\n";
    for (const auto& var : net.variables) {
        out << "variable " << var.name << " {\n  type discrete [ " << var.cardinality()
            << " ] { ";
        for (int i = 0; i < var.cardinality(); ++i)
            out << (i ? ", " : "") << var.value_labels[i];
        out << " };\n}\n";
    }
    for (const auto& cpt : net.cpts) {
        out << "probability ( " << net.variables[cpt.child].name;
        if (!cpt.parents.empty()) {
            out << " | ";
            for (size_t i = 0; i < cpt.parents.size(); ++i)
                out << (i ? ", " : "") << net.variables[cpt.parents[i]].name;
        }
        out << " ) {\n";
        if (cpt.parents.empty()) {
            out << "  table ";
            for (size_t i = 0; i < cpt.rows[0].size(); ++i) {
                if (i) out << ", ";
                write_number(out, cpt.rows[0][i]);
            }
            out << ";\n";
        } else {
            std::vector<int> digits(cpt.parents.size(), 0);
            for (const auto& row : cpt.rows) {
                out << "  (";
                for (size_t i = 0; i < cpt.parents.size(); ++i) {
                    if (i) out << ", ";
                    out << net.variables[cpt.parents[i]].value_labels[digits[i]];
                }
                out << ") ";
                for (size_t i = 0; i < row.size(); ++i) {
                    if (i) out << ", ";
                    write_number(out, row[i]);
                }
                out << ";\n";
                for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
                    if (++digits[i] < net.variables[cpt.parents[i]].cardinality()) break;
                    digits[i] = 0;
                }
            }
        }
        out << "}\n";
    }
    return out.str();
}

}  // namespace bnv
