#include <map>
#include <sstream>

#include "bus_view.hpp"
#include "tbsynth/seq_dsl.hpp"
#include "text_util.hpp"

namespace tbsynth {

namespace {

using detail::FieldTarget;

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string op_name(std::uint64_t v) {
  switch (v) {
    case 0: return "OP_IDLE";
    case 1: return "OP_WRITE";
    default: return "OP_READ";
  }
}

// Register value with the given fields replaced.
std::uint64_t compose(const RegisterDecl& r, std::uint64_t base, const FieldTarget& t, std::uint64_t v) {
  if (t.kind == FieldTarget::kRegister) return v & text::width_mask(r.width);
  const std::uint64_t m = text::width_mask(t.width) << t.lsb;
  return (base & ~m) | ((v << t.lsb) & m);
}

class SeqWriter {
 public:
  SeqWriter(const DslSequence& seq, const Blueprint& bp)
      : seq_(seq), bp_(bp), bus_(detail::make_bus_view(bp)), d_(bp.design_name) {}

  std::string class_text() {
    std::ostringstream body;
    for (std::size_t i = 0; i < seq_.steps.size(); ++i) step(body, static_cast<int>(i), seq_.steps[i]);

    std::ostringstream out;
    if (!seq_.description.empty()) out << "// " << one_line(seq_.description) << "\n";
    out << "class " << seq_.name << " extends " << d_ << "_base_seq;\n"
        << "  `uvm_object_utils(" << seq_.name << ")\n\n"
        << "  function new(string name = \"" << seq_.name << "\");\n"
        << "    super.new(name);\n"
        << "  endfunction\n\n"
        << "  task body();\n";
    if (need_tr_) out << "    " << d_ << "_seq_item seq_tr;\n";
    if (need_poll_) out << "    int unsigned seq_poll_count;\n";
    if (need_mem_) out << "    bit [63:0] seq_mem_data[$];\n";
    if (need_params_) out << "    int unsigned seq_bfm_params[string];\n";
    for (const auto& [name, w] : reads_) out << "    bit " << detail::sv_range(w) << "seq_rd_" << name << ";\n";
    if (need_tr_ || need_poll_ || need_mem_ || need_params_ || !reads_.empty()) out << "\n";
    out << body.str() << "  endtask\nendclass\n";
    return out.str();
  }

 private:
  [[noreturn]] void unresolved(const std::string& what) {
    throw UnresolvedSignal("sequence " + seq_.name + ": cannot resolve " + what);
  }

  const RegisterDecl& reg_at(std::uint64_t addr) {
    const RegisterDecl* r = bp_.find_register_at(addr);
    if (!r || !bus_.is_bus) unresolved("register address " + text::hex(addr));
    return *r;
  }

  FieldTarget target(const std::string& name) {
    FieldTarget t = detail::resolve_field(bp_, bus_, name);
    if (t.kind == FieldTarget::kNone || t.kind == FieldTarget::kOp || t.kind == FieldTarget::kBusMember) {
      unresolved("stimulus field " + name);
    }
    if (t.reg && !bus_.is_bus) unresolved("register field " + name);
    return t;
  }

  std::string addr_lit(std::uint64_t a) const { return text::sv_hex(a, bus_.addr_width); }

  void open_item(std::ostream& o, const std::string& ind) {
    need_tr_ = true;
    o << ind << "seq_tr = new_item();\n" << ind << "start_item(seq_tr);\n";
  }

  void close_item(std::ostream& o, const std::string& ind) { o << ind << "finish_item(seq_tr);\n"; }

  void write_fields(std::ostream& o, const std::string& ind, std::uint64_t addr, const std::string& data) {
    o << ind << "seq_tr.op = OP_WRITE;\n"
      << ind << "seq_tr." << bus_.write_addr << " = " << addr_lit(addr) << ";\n"
      << ind << "seq_tr." << bus_.wdata << " = " << data << ";\n";
  }

  void read_item(std::ostream& o, const std::string& ind, std::uint64_t addr) {
    open_item(o, ind);
    o << ind << "seq_tr.op = OP_READ;\n" << ind << "seq_tr." << bus_.read_addr << " = " << addr_lit(addr) << ";\n";
    close_item(o, ind);
  }

  static void value_array(std::ostream& o, const std::string& ind, const std::string& name, int width,
                          const std::vector<std::uint64_t>& values) {
    o << ind << "bit " << detail::sv_range(width) << name << "[] = '{";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) o << ",";
      if (i % 8 == 0 && values.size() > 8) o << "\n" << ind << "  ";
      else if (i > 0) o << " ";
      o << text::sv_hex(values[i], width);
    }
    o << "};\n";
  }

  // value_sweep and toggle_pattern: one transaction per value.
  void sweep_one(std::ostream& o, int idx, const char* kind, const std::string& field,
                 const std::vector<std::uint64_t>& values) {
    const FieldTarget t = target(field);
    std::vector<std::uint64_t> arr = values;
    int width = t.width;
    if (t.reg) {
      const std::uint64_t base = detail::register_reset_value(*t.reg);
      for (auto& v : arr) v = compose(*t.reg, base, t, v);
      width = t.reg->width;
    }
    o << "    begin : step_" << idx << "_" << kind << "\n";
    value_array(o, "      ", "seq_values", width, arr);
    o << "      foreach (seq_values[seq_i]) begin\n";
    open_item(o, "        ");
    if (t.reg) {
      write_fields(o, "        ", t.reg->address, "seq_values[seq_i]");
    } else {
      o << "        seq_tr." << field << " = seq_values[seq_i];\n";
    }
    close_item(o, "        ");
    o << "      end\n    end\n";
  }

  void config_sweep(std::ostream& o, int idx, const DslStep& s) {
    std::vector<FieldTarget> targets;
    const RegisterDecl* reg = nullptr;
    for (const auto& f : s.sweep) {
      targets.push_back(target(f.field));
      if (targets.back().reg) reg = targets.back().reg;
    }
    const auto tuples = expand_config_sweep(s.sweep);
    o << "    begin : step_" << idx << "_config_sweep\n";
    std::vector<std::string> port_arrays;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      if (targets[k].reg) continue;
      std::vector<std::uint64_t> col;
      for (const auto& tup : tuples) col.push_back(tup[k]);
      const std::string name = "seq_" + s.sweep[k].field;
      value_array(o, "      ", name, targets[k].width, col);
      port_arrays.push_back(name);
    }
    if (reg) {
      const std::uint64_t base = detail::register_reset_value(*reg);
      std::vector<std::uint64_t> col;
      for (const auto& tup : tuples) {
        std::uint64_t v = base;
        for (std::size_t k = 0; k < targets.size(); ++k) {
          if (targets[k].reg) v = compose(*reg, v, targets[k], tup[k]);
        }
        col.push_back(v);
      }
      value_array(o, "      ", "seq_reg_values", reg->width, col);
    }
    const std::string first = reg ? "seq_reg_values" : port_arrays.front();
    o << "      foreach (" << first << "[seq_i]) begin\n";
    open_item(o, "        ");
    if (reg) write_fields(o, "        ", reg->address, "seq_reg_values[seq_i]");
    for (std::size_t k = 0, p = 0; k < targets.size(); ++k) {
      if (targets[k].reg) continue;
      o << "        seq_tr." << s.sweep[k].field << " = " << port_arrays[p++] << "[seq_i];\n";
    }
    close_item(o, "        ");
    o << "      end\n    end\n";
  }

  std::string constraint_text(const Constraint& c) {
    const FieldTarget t = detail::resolve_field(bp_, bus_, c.field);
    const bool is_op = t.kind == FieldTarget::kOp;
    int width = t.width;
    if (const SeqItemField* f = bp_.find_field(c.field)) width = f->width;
    auto lit = [&](std::uint64_t v) { return is_op ? op_name(v) : text::sv_hex(v, width); };
    switch (c.relation) {
      case Relation::kEq: return c.field + " == " + lit(c.operand.at(0)) + ";";
      case Relation::kInSet: {
        std::vector<std::string> parts;
        for (auto v : c.operand) parts.push_back(lit(v));
        return c.field + " inside {" + text::join(parts, ", ") + "};";
      }
      case Relation::kInRange:
        return c.field + " inside {[" + lit(c.operand.at(0)) + ":" + lit(c.operand.at(1)) + "]};";
    }
    return "";
  }

  void randomize_send(std::ostream& o, const DslStep& s) {
    std::vector<std::string> cs;
    std::set<std::string> constrained;
    for (const auto& c : s.constraints) constrained.insert(c.field);
    if (bus_.is_bus) {
      if (!constrained.count("op")) cs.push_back("op inside {OP_WRITE, OP_READ};");
      std::vector<std::string> addrs;
      for (const auto& r : bp_.registers) addrs.push_back(addr_lit(r.address));
      const std::string set = " inside {" + text::join(addrs, ", ") + "};";
      if (!constrained.count(bus_.write_addr)) cs.push_back(bus_.write_addr + set);
      if (bus_.read_addr != bus_.write_addr && !constrained.count(bus_.read_addr)) cs.push_back(bus_.read_addr + set);
    }
    for (const auto& c : s.constraints) cs.push_back(constraint_text(c));

    std::string ind = "    ";
    if (s.repeat > 1) {
      o << ind << "repeat (" << s.repeat << ") begin\n";
      ind += "  ";
    }
    open_item(o, ind);
    if (cs.empty()) {
      o << ind << "if (!seq_tr.randomize())\n";
    } else {
      o << ind << "if (!seq_tr.randomize() with {\n";
      for (const auto& c : cs) o << ind << "      " << c << "\n";
      o << ind << "    })\n";
    }
    o << ind << "  `uvm_error(get_type_name(), \"randomize failed\")\n";
    close_item(o, ind);
    if (s.repeat > 1) o << "    end\n";
  }

  void step(std::ostream& o, int idx, const DslStep& s) {
    o << "    // step " << idx << ": " << to_string(s.type);
    switch (s.type) {
      case StepType::kRegisterWrite: {
        const RegisterDecl& r = reg_at(s.addr);
        o << " " << r.name << " <= " << text::hex(s.value) << "\n";
        open_item(o, "    ");
        write_fields(o, "    ", s.addr, text::sv_hex(s.value, r.width));
        close_item(o, "    ");
        break;
      }
      case StepType::kRegisterRead: {
        const RegisterDecl& r = reg_at(s.addr);
        o << " " << r.name << "\n";
        read_item(o, "    ", s.addr);
        if (!s.store_as.empty()) {
          reads_[s.store_as] = bus_.data_width;
          o << "    seq_rd_" << s.store_as << " = seq_tr." << bus_.rdata << ";\n"
            << "    `uvm_info(get_type_name(), $sformatf(\"" << s.store_as << " = 'h%0h\", seq_rd_" << s.store_as
            << "), UVM_MEDIUM)\n";
        }
        break;
      }
      case StepType::kPoll: {
        const RegisterDecl& r = reg_at(s.addr);
        const std::string mask = text::sv_hex(s.mask, r.width);
        const std::string expected = text::sv_hex(s.expected, r.width);
        const std::string cond = "(seq_tr." + bus_.rdata + " & " + mask + ") != " + expected;
        need_poll_ = true;
        o << " " << r.name << " until (value & " << text::hex(s.mask) << ") == " << text::hex(s.expected)
          << ", at most " << s.max_iters << " reads\n"
          << "    seq_poll_count = 0;\n"
          << "    do begin\n"
          << "      if (seq_poll_count > 0) repeat (" << s.interval_cycles << ") @(posedge vif." << bp_.clock
          << ");\n";
        read_item(o, "      ", s.addr);
        o << "      seq_poll_count++;\n"
          << "    end while ((" << cond << ") && (seq_poll_count < " << s.max_iters << "));\n"
          << "    if (" << cond << ")\n"
          << "      `uvm_warning(get_type_name(), \"poll on " << r.name << " gave up after " << s.max_iters
          << " reads\")\n";
        break;
      }
      case StepType::kRandomizeSend:
        o << "\n";
        randomize_send(o, s);
        break;
      case StepType::kDelay:
        o << " " << s.cycles << " cycles\n"
          << "    repeat (" << s.cycles << ") @(posedge vif." << bp_.clock << ");\n";
        break;
      case StepType::kMemoryWrite:
        need_mem_ = true;
        o << " " << s.bfm << " @ " << text::hex(s.base_addr) << ", " << s.data.size() << " words\n"
          << "    seq_mem_data.delete();\n";
        for (auto v : s.data) o << "    seq_mem_data.push_back(" << text::sv_hex(v, 64) << ");\n";
        o << "    get_bfm(\"" << s.bfm << "\").mem_write(" << text::sv_hex(s.base_addr, 64) << ", seq_mem_data);\n";
        break;
      case StepType::kBfmAction:
        need_params_ = true;
        o << " " << s.bfm << "." << s.action << "\n" << "    seq_bfm_params.delete();\n";
        for (const auto& [k, v] : s.params) {
          o << "    seq_bfm_params[\"" << k << "\"] = " << text::sv_hex(v, 32) << ";\n";
        }
        o << "    get_bfm(\"" << s.bfm << "\").do_action(\"" << s.action << "\", seq_bfm_params);\n";
        break;
      case StepType::kConfigSweep:
        o << "\n";
        config_sweep(o, idx, s);
        break;
      case StepType::kValueSweep:
        o << " " << s.field << "\n";
        sweep_one(o, idx, "value_sweep", s.field, s.values);
        break;
      case StepType::kTogglePattern: {
        o << " " << s.field << " " << to_string(s.pattern) << "\n";
        const FieldTarget t = target(s.field);
        sweep_one(o, idx, "toggle_pattern", s.field, toggle_values(s.pattern, t.width));
        break;
      }
    }
  }

  const DslSequence& seq_;
  const Blueprint& bp_;
  detail::BusView bus_;
  std::string d_;
  bool need_tr_ = false;
  bool need_poll_ = false;
  bool need_mem_ = false;
  bool need_params_ = false;
  std::map<std::string, int> reads_;
};

}  // namespace

std::string generate_sequence(const DslSequence& seq, const Blueprint& bp) { return SeqWriter(seq, bp).class_text(); }

std::string sequence_package_file_name(int iteration) {
  return "sequence_pkg_iter" + std::to_string(iteration) + ".sv";
}

std::string generate_sequence_package(const std::vector<DslSequence>& seqs, const Blueprint& bp, int iteration) {
  const std::string& d = bp.design_name;
  const std::string it = std::to_string(iteration);
  std::ostringstream out;
  out << "// " << sequence_package_file_name(iteration) << "\n"
      << "// Sequences for " << d << ", iteration " << it << ".\n\n"
      << "`include \"uvm_macros.svh\"\n"
      << "import uvm_pkg::*;\n";
  for (const auto& s : seqs) out << "\n" << generate_sequence(s, bp);
  out << "\nclass " << d << "_seq_registry_iter" << it << ";\n"
      << "  static bit registered = register_all();\n\n"
      << "  static function bit register_all();\n";
  for (const auto& s : seqs) out << "    void'(" << d << "_seq_registry::add(\"" << s.name << "\"));\n";
  out << "    return 1'b1;\n"
      << "  endfunction\n"
      << "endclass\n";
  return out.str();
}

}  // namespace tbsynth
