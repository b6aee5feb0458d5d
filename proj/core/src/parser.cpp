#include <taintflow/parser.h>

#include <cctype>
#include <sstream>
#include <unordered_set>

namespace taintflow {

namespace {

enum class Tok {
  Ident,
  String,
  Directive, // #ssa
  Punct,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> words = {
      "type", "extends", "field", "method", "new", "binop", "call",
      "vcall", "phi", "goto", "if", "else", "return"};
  return words;
}

class Lexer {
 public:
  explicit Lexer(std::string_view source) : source_(source) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    for (;;) {
      skip_space();
      Token token;
      token.line = line_;
      token.column = column_;
      if (pos_ >= source_.size()) {
        tokens.push_back(token);
        return tokens;
      }
      char c = source_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        token.kind = Tok::Ident;
        while (pos_ < source_.size() && is_ident_char(source_[pos_])) {
          token.text += advance();
        }
      } else if (c == '"') {
        token.kind = Tok::String;
        advance();
        for (;;) {
          if (pos_ >= source_.size() || source_[pos_] == '\n') {
            throw ParseError("unterminated string literal", token.line,
                             token.column);
          }
          char ch = advance();
          if (ch == '"') {
            break;
          }
          if (ch == '\\') {
            if (pos_ >= source_.size()) {
              throw ParseError("unterminated string literal", token.line,
                               token.column);
            }
            char esc = advance();
            switch (esc) {
              case 'n':
                token.text += '\n';
                break;
              case 't':
                token.text += '\t';
                break;
              default:
                token.text += esc;
            }
          } else {
            token.text += ch;
          }
        }
      } else if (c == '#') {
        token.kind = Tok::Directive;
        advance();
        while (pos_ < source_.size() && is_ident_char(source_[pos_])) {
          token.text += advance();
        }
        if (token.text != "ssa") {
          throw ParseError("unknown directive '#" + token.text + "'",
                           token.line, token.column);
        }
      } else if (std::string_view("{}(),;:=.[]").find(c) !=
                 std::string_view::npos) {
        token.kind = Tok::Punct;
        token.text = std::string(1, advance());
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'",
                         token.line, token.column);
      }
      tokens.push_back(std::move(token));
    }
  }

 private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
        c == '$';
  }

  char advance() {
    char c = source_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < source_.size()) {
      char c = source_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < source_.size() &&
                 source_[pos_ + 1] == '/') {
        while (pos_ < source_.size() && source_[pos_] != '\n') {
          advance();
        }
      } else {
        return;
      }
    }
  }

  std::string_view source_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Program run() {
    Program program;
    while (!at_end()) {
      const auto& token = peek();
      if (token.kind == Tok::Directive) {
        next();
        program.declared_ssa = true;
      } else if (is_word("type")) {
        program.classes.push_back(parse_type());
      } else if (is_word("method")) {
        program.methods.push_back(parse_method());
      } else {
        fail("expected 'type', 'method' or '#ssa'");
      }
    }
    program.finalize();
    return program;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& next() {
    const Token& token = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) {
      ++pos_;
    }
    return token;
  }
  bool at_end() const { return peek().kind == Tok::End; }

  bool is_word(const char* word, std::size_t ahead = 0) const {
    const auto& token = peek(ahead);
    return token.kind == Tok::Ident && token.text == word;
  }
  bool is_punct(char c, std::size_t ahead = 0) const {
    const auto& token = peek(ahead);
    return token.kind == Tok::Punct && token.text[0] == c;
  }

  [[noreturn]] void fail(const std::string& message) const {
    const auto& token = peek();
    std::string found = token.kind == Tok::End ? "end of input"
                                               : "'" + token.text + "'";
    throw ParseError(message + ", found " + found, token.line, token.column);
  }

  void expect_punct(char c) {
    if (!is_punct(c)) {
      fail(std::string("expected '") + c + "'");
    }
    next();
  }
  void expect_word(const char* word) {
    if (!is_word(word)) {
      fail(std::string("expected '") + word + "'");
    }
    next();
  }

  Symbol name(const char* what) {
    const auto& token = peek();
    if (token.kind != Tok::Ident || keywords().count(token.text)) {
      fail(std::string("expected ") + what);
    }
    return Symbol(next().text);
  }

  Symbol qualified_name() {
    std::string text = name("name").str();
    if (is_punct('.')) {
      next();
      text += "." + name("name").str();
    }
    return Symbol(text);
  }

  ClassDecl parse_type() {
    ClassDecl decl;
    decl.line = peek().line;
    expect_word("type");
    decl.name = name("type name");
    if (is_word("extends")) {
      next();
      decl.superclass = name("supertype name");
    }
    expect_punct('{');
    while (is_word("field")) {
      next();
      FieldDecl field;
      field.name = name("field name");
      if (is_punct('[')) {
        next();
        expect_punct(']');
        field.is_array = true;
      }
      expect_punct(';');
      decl.fields.push_back(field);
    }
    expect_punct('}');
    return decl;
  }

  std::vector<Symbol> var_list() {
    std::vector<Symbol> vars;
    expect_punct('(');
    if (!is_punct(')')) {
      vars.push_back(name("variable"));
      while (is_punct(',')) {
        next();
        vars.push_back(name("variable"));
      }
    }
    expect_punct(')');
    return vars;
  }

  Method parse_method() {
    Method method;
    method.line = peek().line;
    expect_word("method");
    method.name = qualified_name();
    method.params = var_list();
    expect_punct('{');
    do {
      method.blocks.push_back(parse_block());
    } while (!is_punct('}'));
    expect_punct('}');
    return method;
  }

  BasicBlock parse_block() {
    BasicBlock block;
    block.line = peek().line;
    block.label = name("block label");
    expect_punct(':');
    for (;;) {
      Statement stmt = parse_statement();
      bool done = stmt.is_terminator();
      block.stmts.push_back(std::move(stmt));
      if (done) {
        return block;
      }
    }
  }

  Statement parse_call(Statement stmt) {
    if (is_word("call")) {
      next();
      stmt.kind = StmtKind::Call;
      stmt.callee = qualified_name();
    } else {
      expect_word("vcall");
      stmt.kind = StmtKind::VCall;
      stmt.object = name("receiver");
      expect_punct('.');
      stmt.callee = name("method name");
    }
    stmt.args = var_list();
    expect_punct(';');
    return stmt;
  }

  Statement parse_statement() {
    Statement stmt;
    stmt.line = peek().line;
    if (is_word("goto")) {
      next();
      stmt.kind = StmtKind::Goto;
      stmt.targets.push_back(name("label"));
      expect_punct(';');
      return stmt;
    }
    if (is_word("if")) {
      next();
      stmt.kind = StmtKind::If;
      stmt.value = name("condition variable");
      expect_word("goto");
      stmt.targets.push_back(name("label"));
      expect_word("else");
      stmt.targets.push_back(name("label"));
      expect_punct(';');
      return stmt;
    }
    if (is_word("return")) {
      next();
      stmt.kind = StmtKind::Return;
      if (!is_punct(';')) {
        stmt.value = name("return variable");
      }
      expect_punct(';');
      return stmt;
    }
    if (is_word("call") || is_word("vcall")) {
      return parse_call(std::move(stmt));
    }
    if (peek().kind == Tok::Ident && is_punct(':', 1)) {
      fail("block ended without a terminator");
    }

    Symbol first = name("variable");
    if (is_punct('.')) {
      next();
      stmt.kind = StmtKind::Store;
      stmt.object = first;
      stmt.field = name("field name");
      expect_punct('=');
      stmt.value = name("variable");
      expect_punct(';');
      return stmt;
    }
    expect_punct('=');
    stmt.result = first;

    if (peek().kind == Tok::String) {
      stmt.kind = StmtKind::Const;
      stmt.literal = next().text;
    } else if (is_word("new")) {
      next();
      stmt.kind = StmtKind::Alloc;
      stmt.type = name("type name");
    } else if (is_word("binop")) {
      next();
      stmt.kind = StmtKind::BinOp;
      expect_punct('(');
      stmt.args.push_back(name("variable"));
      expect_punct(',');
      stmt.args.push_back(name("variable"));
      expect_punct(')');
    } else if (is_word("call") || is_word("vcall")) {
      return parse_call(std::move(stmt));
    } else if (is_word("phi")) {
      next();
      stmt.kind = StmtKind::Phi;
      expect_punct('(');
      do {
        if (!stmt.incoming.empty()) {
          next(); // ','
        }
        PhiIncoming in;
        in.label = name("label");
        expect_punct(':');
        in.value = name("variable");
        stmt.incoming.push_back(in);
      } while (is_punct(','));
      expect_punct(')');
    } else {
      Symbol source = name("variable");
      if (is_punct('.')) {
        next();
        stmt.kind = StmtKind::Load;
        stmt.object = source;
        stmt.field = name("field name");
      } else {
        stmt.kind = StmtKind::Assign;
        stmt.value = source;
      }
    }
    expect_punct(';');
    return stmt;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string join(const std::vector<Symbol>& vars) {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += vars[i].str();
  }
  return out;
}

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

} // namespace

Program parse_program(std::string_view source) {
  return Parser(Lexer(source).run()).run();
}

std::string print_statement(const Statement& stmt) {
  std::string lhs = stmt.result.empty() ? "" : stmt.result.str() + " = ";
  switch (stmt.kind) {
    case StmtKind::Alloc:
      return lhs + "new " + stmt.type.str() + ";";
    case StmtKind::Assign:
      return lhs + stmt.value.str() + ";";
    case StmtKind::Const:
      return lhs + quote(stmt.literal) + ";";
    case StmtKind::Load:
      return lhs + stmt.object.str() + "." + stmt.field.str() + ";";
    case StmtKind::Store:
      return stmt.object.str() + "." + stmt.field.str() + " = " +
          stmt.value.str() + ";";
    case StmtKind::BinOp:
      return lhs + "binop(" + join(stmt.args) + ");";
    case StmtKind::Call:
      return lhs + "call " + stmt.callee.str() + "(" + join(stmt.args) + ");";
    case StmtKind::VCall:
      return lhs + "vcall " + stmt.object.str() + "." + stmt.callee.str() +
          "(" + join(stmt.args) + ");";
    case StmtKind::Phi: {
      std::string out = lhs + "phi(";
      for (std::size_t i = 0; i < stmt.incoming.size(); ++i) {
        if (i > 0) {
          out += ", ";
        }
        out += stmt.incoming[i].label.str() + ": " +
            stmt.incoming[i].value.str();
      }
      return out + ");";
    }
    case StmtKind::Return:
      return stmt.value.empty() ? "return;" : "return " + stmt.value.str() + ";";
    case StmtKind::Goto:
      return "goto " + stmt.targets.at(0).str() + ";";
    case StmtKind::If:
      return "if " + stmt.value.str() + " goto " + stmt.targets.at(0).str() +
          " else " + stmt.targets.at(1).str() + ";";
  }
  return "";
}

std::string print_program(const Program& program) {
  std::ostringstream out;
  if (program.declared_ssa) {
    out << "#ssa\n\n";
  }
  for (const auto& cls : program.classes) {
    out << "type " << cls.name.str();
    if (cls.superclass) {
      out << " extends " << cls.superclass->str();
    }
    out << " {";
    for (const auto& field : cls.fields) {
      out << " field " << field.name.str() << (field.is_array ? "[]" : "")
          << ";";
    }
    out << " }\n";
  }
  if (!program.classes.empty()) {
    out << "\n";
  }
  for (const auto& method : program.methods) {
    out << "method " << method.name.str() << "(" << join(method.params)
        << ") {\n";
    for (const auto& block : method.blocks) {
      out << "  " << block.label.str() << ":\n";
      for (const auto& stmt : block.stmts) {
        out << "    " << print_statement(stmt) << "\n";
      }
    }
    out << "}\n\n";
  }
  return out.str();
}

} // namespace taintflow
