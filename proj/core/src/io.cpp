// Copyright 2026 The Redmx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "redmx/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "redmx/errors.hpp"

namespace redmx {

namespace {

struct Token {
  std::string_view text;
  int column = 0;
};

struct Line {
  std::vector<Token> tokens;
  int number = 0;
  int end_column = 1;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view raw = text.substr(start, stop - start);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line;
    line.number = number;
    line.end_column = static_cast<int>(raw.size()) + 1;
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i >= raw.size()) break;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      line.tokens.push_back({raw.substr(i, j - i), static_cast<int>(i) + 1});
      i = j;
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (stop == text.size()) break;
    start = stop + 1;
  }
  return lines;
}

// Sequential reader over the tokens of one line.
class Cursor {
 public:
  explicit Cursor(const Line& line) : line_(line) {}

  bool done() const { return pos_ >= line_.tokens.size(); }
  const Token* peek() const { return done() ? nullptr : &line_.tokens[pos_]; }
  bool peek_is(std::string_view word) const { return !done() && line_.tokens[pos_].text == word; }

  [[noreturn]] void fail(const std::string& message) const {
    const int column = done() ? line_.end_column : line_.tokens[pos_].column;
    throw ParseError(message, line_.number, column);
  }
  [[noreturn]] void fail_at(const Token& token, const std::string& message) const {
    throw ParseError(message, line_.number, token.column);
  }

  const Token& next(const char* what) {
    if (done()) fail(std::string("expected ") + what);
    return line_.tokens[pos_++];
  }

  void expect(std::string_view word) {
    const Token& t = next(std::string(word).c_str());
    if (t.text != word) fail_at(t, "expected '" + std::string(word) + "', found '" + std::string(t.text) + "'");
  }

  double number(const char* what) {
    const Token& t = next(what);
    double value = 0.0;
    const auto* first = t.text.data();
    const auto* last = first + t.text.size();
    if (*first == '+') ++first;
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last || !std::isfinite(value)) {
      fail_at(t, std::string("expected ") + what + ", found '" + std::string(t.text) + "'");
    }
    return value;
  }

  bool is_number() const {
    if (done()) return false;
    const auto text = line_.tokens[pos_].text;
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto result = std::from_chars(first, last, value);
    return result.ec == std::errc() && result.ptr == last;
  }

  int integer(const char* what) {
    const Token& t = next(what);
    int value = 0;
    const auto result = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (result.ec != std::errc() || result.ptr != t.text.data() + t.text.size()) {
      fail_at(t, std::string("expected ") + what + ", found '" + std::string(t.text) + "'");
    }
    return value;
  }

  void finish() const {
    if (!done()) fail("unexpected token '" + std::string(line_.tokens[pos_].text) + "'");
  }

  int line() const { return line_.number; }
  const Token& token_at(std::size_t i) const { return line_.tokens[i]; }
  std::size_t position() const { return pos_; }

 private:
  const Line& line_;
  std::size_t pos_ = 0;
};

std::string shortest(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void check_header(Cursor& c, std::string_view tag) {
  const Token& t = c.next("header");
  if (t.text != tag) {
    c.fail_at(t, "expected '" + std::string(tag) + " 1' header, found '" + std::string(t.text) + "'");
  }
  const Token& v = *c.peek();
  if (c.done()) c.fail("expected format version");
  const int version = c.integer("format version");
  if (version != 1) c.fail_at(v, "unsupported format version " + std::to_string(version));
  c.finish();
}

// Reads "E v A v [I v]" in any order.
void read_properties(Cursor& c, Element& e) {
  bool has_e = false;
  bool has_a = false;
  bool has_i = false;
  while (!c.done()) {
    const Token& key = c.next("property");
    if (key.text == "E") {
      e.youngs_modulus = c.number("Young's modulus");
      has_e = true;
    } else if (key.text == "A") {
      e.area = c.number("cross-sectional area");
      has_a = true;
    } else if (key.text == "I") {
      if (e.kind != ElementKind::PlaneBeam) c.fail_at(key, "I is only valid for beams");
      e.moment_of_inertia = c.number("second moment of area");
      has_i = true;
    } else {
      c.fail_at(key, "unknown property '" + std::string(key.text) + "'");
    }
  }
  if (!has_e) c.fail("missing E");
  if (!has_a) c.fail("missing A");
  if (e.kind == ElementKind::PlaneBeam && !has_i) c.fail("missing I for beam");
}

RawPayload read_raw(Cursor& c) {
  RawPayload p;
  c.expect("c");
  while (c.is_number()) p.stiffness.push_back(c.number("stiffness"));
  if (p.stiffness.empty()) c.fail("expected at least one stiffness after 'c'");
  while (!c.done()) {
    const Token& kind = c.next("row");
    RawRow row;
    if (kind.text == "row") {
      while (c.is_number()) row.values.push_back(c.number("row entry"));
    } else if (kind.text == "srow") {
      while (!c.done() && !c.peek_is("row") && !c.peek_is("srow")) {
        const Token& t = c.next("column:value");
        const auto colon = t.text.find(':');
        if (colon == std::string_view::npos) c.fail_at(t, "expected column:value");
        int column = 0;
        double value = 0.0;
        const auto col_text = t.text.substr(0, colon);
        const auto val_text = t.text.substr(colon + 1);
        const auto r1 = std::from_chars(col_text.data(), col_text.data() + col_text.size(), column);
        const auto r2 = std::from_chars(val_text.data(), val_text.data() + val_text.size(), value);
        if (r1.ec != std::errc() || r1.ptr != col_text.data() + col_text.size() || column < 1 ||
            r2.ec != std::errc() || r2.ptr != val_text.data() + val_text.size() ||
            !std::isfinite(value)) {
          c.fail_at(t, "malformed sparse entry '" + std::string(t.text) + "'");
        }
        row.columns.push_back(column - 1);
        row.values.push_back(value);
      }
      row.sparse = true;
    } else {
      c.fail_at(kind, "expected 'row' or 'srow', found '" + std::string(kind.text) + "'");
    }
    if (row.values.empty() && !row.sparse) c.fail_at(kind, "empty row");
    p.rows.push_back(std::move(row));
  }
  if (p.rows.size() != p.stiffness.size()) {
    c.fail(std::to_string(p.stiffness.size()) + " stiffnesses but " +
           std::to_string(p.rows.size()) + " rows");
  }
  return p;
}

GeometricPayload read_geometric(Cursor& c) {
  const Token& kind = c.next("element kind");
  Element e;
  if (kind.text == "truss") {
    e.kind = ElementKind::Truss;
  } else if (kind.text == "beam") {
    e.kind = ElementKind::PlaneBeam;
  } else {
    c.fail_at(kind, "unknown element kind '" + std::string(kind.text) + "'");
  }
  GeometricPayload g;
  g.kind = e.kind;
  g.node_ids[0] = c.integer("first node id");
  g.node_ids[1] = c.integer("second node id");
  read_properties(c, e);
  g.youngs_modulus = e.youngs_modulus;
  g.area = e.area;
  g.moment_of_inertia = e.moment_of_inertia;
  return g;
}

ScriptElement read_script_element(Cursor& c) {
  ScriptElement e;
  if (c.peek_is("id")) {
    c.next("id");
    e.id = c.integer("element id");
    if (e.id <= 0) c.fail("element ids must be positive");
  }
  if (c.peek_is("c")) {
    e.payload = read_raw(c);
  } else {
    e.payload = read_geometric(c);
  }
  return e;
}

ElementRef read_ref(Cursor& c) {
  const Token& t = c.next("element reference");
  ElementRef ref;
  std::string_view text = t.text;
  if (!text.empty() && text[0] == '@') {
    ref.kind = ElementRef::Kind::Id;
    text.remove_prefix(1);
  }
  const auto result = std::from_chars(text.data(), text.data() + text.size(), ref.value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size() || ref.value < 1) {
    c.fail_at(t, "expected element number or @id, found '" + std::string(t.text) + "'");
  }
  return ref;
}

std::string fix_flags(const Node& n, int dimension) {
  std::string flags;
  const char names[] = {'x', 'y', 'z'};
  for (int d = 0; d < dimension; ++d) {
    if (n.fixed[static_cast<std::size_t>(d)]) flags += names[d];
  }
  if (n.fixed_rotation) flags += 'r';
  return flags;
}

void write_payload(std::ostringstream& out, const GeometricPayload& g) {
  out << (g.kind == ElementKind::Truss ? "truss " : "beam ") << g.node_ids[0] << ' '
      << g.node_ids[1] << " E " << shortest(g.youngs_modulus) << " A " << shortest(g.area);
  if (g.kind == ElementKind::PlaneBeam) out << " I " << shortest(g.moment_of_inertia);
}

void write_payload(std::ostringstream& out, const RawPayload& p) {
  out << 'c';
  for (double v : p.stiffness) out << ' ' << shortest(v);
  for (const auto& row : p.rows) {
    if (row.sparse) {
      out << " srow";
      for (std::size_t i = 0; i < row.values.size(); ++i) {
        out << ' ' << row.columns[i] + 1 << ':' << shortest(row.values[i]);
      }
    } else {
      out << " row";
      for (double v : row.values) out << ' ' << shortest(v);
    }
  }
}

void write_element(std::ostringstream& out, const ScriptElement& e) {
  if (e.id != 0) out << "id " << e.id << ' ';
  std::visit([&](const auto& p) { write_payload(out, p); }, e.payload);
}

void write_ref(std::ostringstream& out, const ElementRef& ref) {
  if (ref.kind == ElementRef::Kind::Id) out << '@';
  out << ref.value;
}

ScriptStep read_step(Cursor& c, const std::vector<Line>* lines, std::size_t* index) {
  const Token& verb = c.next("operation");
  if (verb.text == "add") {
    AddStep step;
    if (c.peek_is("at")) {
      c.next("at");
      const Token& t = *c.peek();
      if (c.done()) c.fail("expected element number after 'at'");
      step.at = c.integer("element number");
      if (*step.at < 1) c.fail_at(t, "element numbers start at 1");
    }
    if (c.peek_is("begin")) {
      c.next("begin");
      c.finish();
      if (lines == nullptr) c.fail("'begin' is only valid in scripts");
      step.grouped = true;
      const int opened = c.line();
      for (++*index;; ++*index) {
        if (*index >= lines->size()) {
          throw ParseError("unterminated 'add begin' block", opened, verb.column);
        }
        Cursor inner((*lines)[*index]);
        if (inner.peek_is("end")) {
          inner.next("end");
          inner.finish();
          break;
        }
        step.elements.push_back(read_script_element(inner));
      }
      if (step.elements.empty()) throw ParseError("empty 'add begin' block", opened, verb.column);
    } else {
      step.elements.push_back(read_script_element(c));
    }
    return step;
  }
  if (verb.text == "remove") {
    RemoveStep step;
    step.elements.push_back(read_ref(c));
    while (!c.done()) step.elements.push_back(read_ref(c));
    return step;
  }
  if (verb.text == "exchange") {
    ExchangeStep step;
    step.element = read_ref(c);
    step.replacement = read_script_element(c);
    return step;
  }
  c.fail_at(verb, "unknown operation '" + std::string(verb.text) + "'");
}

}  // namespace

ModelDocument parse_model(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty model document", 1, 1);
  {
    Cursor header(lines[0]);
    check_header(header, "rxm");
  }
  enum class Mode { Unknown, Geometric, Raw } mode = Mode::Unknown;
  StructuralModel model;
  bool has_dim = false;
  Index raw_dofs = 0;
  std::vector<ElementBlock> raw_blocks;
  std::map<int, int> element_lines;
  std::set<int> node_ids;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    Cursor c(lines[i]);
    const Token& key = c.next("record");
    auto require = [&](Mode wanted) {
      if (mode == Mode::Unknown) mode = wanted;
      if (mode != wanted) c.fail_at(key, "cannot mix geometric and raw records");
    };
    if (key.text == "dim") {
      require(Mode::Geometric);
      if (has_dim) c.fail_at(key, "duplicate dim record");
      const Token& t = *c.peek();
      if (c.done()) c.fail("expected dimension");
      model.dimension = c.integer("dimension");
      if (model.dimension != 2 && model.dimension != 3) c.fail_at(t, "dimension must be 2 or 3");
      has_dim = true;
      c.finish();
    } else if (key.text == "node") {
      require(Mode::Geometric);
      if (!has_dim) c.fail_at(key, "dim must precede node records");
      Node n;
      const Token& id_token = *c.peek();
      if (c.done()) c.fail("expected node id");
      n.id = c.integer("node id");
      if (!node_ids.insert(n.id).second) {
        c.fail_at(id_token, "duplicate node id " + std::to_string(n.id));
      }
      for (int d = 0; d < model.dimension; ++d) n.coords[d] = c.number("coordinate");
      if (c.peek_is("fix")) {
        c.next("fix");
        const Token& flags = c.next("support flags");
        if (flags.text == "all") {
          n.fixed = {true, true, model.dimension == 3};
          n.fixed_rotation = true;
        } else {
          for (char f : flags.text) {
            if (f == 'x') {
              n.fixed[0] = true;
            } else if (f == 'y') {
              n.fixed[1] = true;
            } else if (f == 'z' && model.dimension == 3) {
              n.fixed[2] = true;
            } else if (f == 'r' && model.dimension == 2) {
              n.fixed_rotation = true;
            } else {
              c.fail_at(flags, std::string("invalid support flag '") + f + "'");
            }
          }
        }
      }
      c.finish();
      model.nodes.push_back(n);
    } else if (key.text == "truss" || key.text == "beam") {
      require(Mode::Geometric);
      if (!has_dim) c.fail_at(key, "dim must precede element records");
      Element e;
      e.kind = key.text == "truss" ? ElementKind::Truss : ElementKind::PlaneBeam;
      const Token& id_token = *c.peek();
      if (c.done()) c.fail("expected element id");
      e.id = c.integer("element id");
      if (!element_lines.emplace(e.id, c.line()).second) {
        c.fail_at(id_token, "duplicate element id " + std::to_string(e.id));
      }
      e.node_ids[0] = c.integer("first node id");
      e.node_ids[1] = c.integer("second node id");
      read_properties(c, e);
      if (!(e.youngs_modulus > 0.0)) c.fail_at(key, "element " + std::to_string(e.id) + ": E must be positive");
      if (!(e.area > 0.0)) c.fail_at(key, "element " + std::to_string(e.id) + ": A must be positive");
      if (e.kind == ElementKind::PlaneBeam && !(e.moment_of_inertia > 0.0)) {
        c.fail_at(key, "element " + std::to_string(e.id) + ": I must be positive");
      }
      model.elements.push_back(e);
    } else if (key.text == "raw") {
      require(Mode::Raw);
      if (raw_dofs != 0) c.fail_at(key, "duplicate raw record");
      const Token& t = *c.peek();
      if (c.done()) c.fail("expected number of degrees of freedom");
      const int dofs = c.integer("number of degrees of freedom");
      if (dofs < 1) c.fail_at(t, "number of degrees of freedom must be positive");
      raw_dofs = dofs;
      c.finish();
    } else if (key.text == "element") {
      require(Mode::Raw);
      if (raw_dofs == 0) c.fail_at(key, "raw record must precede element records");
      const Token& id_token = *c.peek();
      if (c.done()) c.fail("expected element id");
      const int id = c.integer("element id");
      if (id < 1) c.fail_at(id_token, "element ids must be positive");
      if (!element_lines.emplace(id, c.line()).second) {
        c.fail_at(id_token, "duplicate element id " + std::to_string(id));
      }
      const RawPayload p = read_raw(c);
      try {
        raw_blocks.push_back(raw_block(p, raw_dofs, id));
      } catch (const ModelError& e) {
        throw ParseError(e.what(), c.line(), key.column);
      }
    } else {
      c.fail_at(key, "unknown record '" + std::string(key.text) + "'");
    }
  }

  if (mode == Mode::Raw) {
    if (raw_blocks.empty()) throw ParseError("raw model has no elements", lines.back().number, 1);
    SystemMatrices sys(raw_dofs);
    sys.insert(0, raw_blocks);
    return sys;
  }
  if (mode == Mode::Unknown) throw ParseError("model has no records", lines[0].number, 1);
  for (const auto& e : model.elements) {
    for (int id : e.node_ids) {
      if (node_ids.count(id) == 0) {
        throw ParseError("element " + std::to_string(e.id) + " references unknown node " +
                             std::to_string(id),
                         element_lines[e.id], 1);
      }
    }
  }
  model.validate();
  return model;
}

std::string serialize_model(const StructuralModel& model) {
  std::ostringstream out;
  out << "rxm 1\ndim " << model.dimension << '\n';
  for (const auto& n : model.nodes) {
    out << "node " << n.id;
    for (int d = 0; d < model.dimension; ++d) out << ' ' << shortest(n.coords[d]);
    const std::string flags = fix_flags(n, model.dimension);
    if (!flags.empty()) out << " fix " << flags;
    out << '\n';
  }
  for (const auto& e : model.elements) {
    out << (e.kind == ElementKind::Truss ? "truss " : "beam ") << e.id << ' ' << e.node_ids[0]
        << ' ' << e.node_ids[1] << " E " << shortest(e.youngs_modulus) << " A "
        << shortest(e.area);
    if (e.kind == ElementKind::PlaneBeam) out << " I " << shortest(e.moment_of_inertia);
    out << '\n';
  }
  return out.str();
}

std::string serialize_model(const SystemMatrices& sys) {
  std::ostringstream out;
  out << "rxm 1\nraw " << sys.dofs() << '\n';
  const bool dense = sys.dofs() <= 16;
  for (std::size_t p = 0; p < sys.element_count(); ++p) {
    const ElementBlock b = sys.block(p);
    out << "element " << b.id << " c";
    for (Index k = 0; k < b.modes(); ++k) out << ' ' << shortest(b.stiffness[k]);
    for (Index k = 0; k < b.modes(); ++k) {
      if (dense) {
        const Eigen::RowVectorXd row = Eigen::MatrixXd(b.rows).row(k);
        out << " row";
        for (Index j = 0; j < row.size(); ++j) out << ' ' << shortest(row[j]);
      } else {
        out << " srow";
        for (SparseRowMatrix::InnerIterator it(b.rows, k); it; ++it) {
          out << ' ' << it.col() + 1 << ':' << shortest(it.value());
        }
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string serialize_model(const ModelDocument& document) {
  return std::visit([](const auto& d) { return serialize_model(d); }, document);
}

SystemMatrices to_system(const ModelDocument& document) {
  if (const auto* model = std::get_if<StructuralModel>(&document)) return assemble_system(*model);
  return std::get<SystemMatrices>(document);
}

ElementBlock raw_block(const RawPayload& payload, Index dofs, int id) {
  if (payload.rows.size() != payload.stiffness.size()) {
    throw ModelError("raw block: stiffness count does not match row count");
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t k = 0; k < payload.rows.size(); ++k) {
    const RawRow& row = payload.rows[k];
    const Index r = static_cast<Index>(k);
    if (row.sparse) {
      for (std::size_t i = 0; i < row.values.size(); ++i) {
        if (row.columns[i] >= dofs) {
          throw ModelError("raw block: column " + std::to_string(row.columns[i] + 1) +
                           " exceeds " + std::to_string(dofs) + " degrees of freedom");
        }
        if (row.values[i] != 0.0) entries.emplace_back(r, row.columns[i], row.values[i]);
      }
    } else {
      if (static_cast<Index>(row.values.size()) != dofs) {
        throw ModelError("raw block: row has " + std::to_string(row.values.size()) +
                         " entries, expected " + std::to_string(dofs));
      }
      for (Index j = 0; j < dofs; ++j) {
        const double v = row.values[static_cast<std::size_t>(j)];
        if (v != 0.0) entries.emplace_back(r, j, v);
      }
    }
  }
  ElementBlock block;
  block.id = id;
  block.rows.resize(static_cast<Index>(payload.rows.size()), dofs);
  block.rows.setFromTriplets(entries.begin(), entries.end());
  block.rows.makeCompressed();
  block.stiffness = Eigen::Map<const Eigen::VectorXd>(payload.stiffness.data(),
                                                      static_cast<Index>(payload.stiffness.size()));
  block.validate(dofs);
  return block;
}

UpdateScript parse_update_script(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  UpdateScript script;
  if (lines.empty()) return script;
  std::size_t first = 0;
  {
    Cursor header(lines[0]);
    if (header.peek_is("rxu")) {
      check_header(header, "rxu");
      first = 1;
    }
  }
  for (std::size_t i = first; i < lines.size(); ++i) {
    Cursor c(lines[i]);
    const int number = lines[i].number;
    ScriptStep step = read_step(c, &lines, &i);
    c.finish();
    script.steps.push_back({std::move(step), number});
  }
  return script;
}

ScriptStep parse_update_step(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  if (lines.size() != 1) throw ParseError("expected exactly one operation", 1, 1);
  Cursor c(lines[0]);
  ScriptStep step = read_step(c, nullptr, nullptr);
  c.finish();
  return step;
}

std::string serialize_step(const ScriptStep& step) {
  std::ostringstream out;
  if (const auto* add = std::get_if<AddStep>(&step)) {
    out << "add";
    if (add->at) out << " at " << *add->at;
    if (add->grouped || add->elements.size() != 1) {
      out << " begin\n";
      for (const auto& e : add->elements) {
        out << "  ";
        write_element(out, e);
        out << '\n';
      }
      out << "end";
    } else {
      out << ' ';
      write_element(out, add->elements.front());
    }
  } else if (const auto* remove = std::get_if<RemoveStep>(&step)) {
    out << "remove";
    for (const auto& ref : remove->elements) {
      out << ' ';
      write_ref(out, ref);
    }
  } else {
    const auto& exchange = std::get<ExchangeStep>(step);
    out << "exchange ";
    write_ref(out, exchange.element);
    out << ' ';
    write_element(out, exchange.replacement);
  }
  return out.str();
}

std::string serialize_script(const UpdateScript& script) {
  std::string out = "rxu 1\n";
  for (const auto& line : script.steps) {
    out += serialize_step(line.step);
    out += '\n';
  }
  return out;
}

std::string format_number(double value, int precision, NumberStyle style) {
  char buffer[128];
  switch (style) {
    case NumberStyle::Shortest:
      return shortest(value);
    case NumberStyle::Significant: {
      if (!(std::abs(value) >= 1e-6)) return "0.0";
      int decimals = precision - 1 - static_cast<int>(std::floor(std::log10(std::abs(value))));
      decimals = std::max(decimals, 0);
      std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
      // Rounding may add a digit (0.09996 -> 0.1000).
      const double rounded = std::abs(std::strtod(buffer, nullptr));
      if (rounded > 0.0 && decimals > 0 &&
          precision - 1 - static_cast<int>(std::floor(std::log10(rounded))) < decimals) {
        std::snprintf(buffer, sizeof(buffer), "%.*f", decimals - 1, value);
      }
      return buffer;
    }
    case NumberStyle::Fixed:
    default: {
      std::snprintf(buffer, sizeof(buffer), "%.*f", std::max(precision, 0), value);
      std::string s(buffer);
      if (s[0] == '-' && std::strtod(buffer, nullptr) == 0.0) s.erase(0, 1);
      return s;
    }
  }
}

std::string export_matrix(const Eigen::MatrixXd& m, int precision, NumberStyle style) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_number(m(i, j), precision, style);
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd parse_matrix(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  std::vector<std::vector<double>> rows;
  for (const auto& line : lines) {
    Cursor c(line);
    std::vector<double> row;
    while (!c.done()) row.push_back(c.number("matrix entry"));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("row has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(rows.front().size()),
                       line.number, 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::string format_report(const RedundancyReport& report, int precision) {
  std::ostringstream out;
  out << "# redundancy report\n";
  out << "n_q " << report.modes << '\n';
  out << "n " << report.dofs << '\n';
  out << "n_s " << report.static_indeterminacy << '\n';
  out << "trace " << format_number(report.trace, precision) << '\n';
  out << "generation " << report.generation << '\n';
  out << "zero_redundancy";
  for (int id : report.zero_redundancy_ids) out << ' ' << id;
  out << '\n';
  out << "# number id modes redundancy\n";
  for (const auto& e : report.elements) {
    out << e.position + 1 << ' ' << e.id << ' ' << e.modes << ' '
        << format_number(e.redundancy, precision);
    if (e.zero) out << " zero";
    out << '\n';
  }
  return out.str();
}

}  // namespace redmx
