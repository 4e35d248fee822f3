#pragma once

// Minimal Python pickle reader, enough for the Planetoid citation files:
// numpy arrays, scipy CSR/CSC matrices, and dict/defaultdict adjacency
// lists, as written by Python 2 (str payloads) or Python 3 (bytes via
// _codecs.encode), protocols 0 through 5 with in-band buffers. Nothing is
// executed; globals are recorded by name and a few known constructors are
// interpreted.

#include "mgcmn/dense_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mgcmn::pickle {

class PickleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Value;
using ValuePtr = std::shared_ptr<Value>;

struct Value {
    enum class Kind { kNone, kBool, kInt, kFloat, kBytes, kString, kTuple, kList, kDict, kSet, kGlobal, kObject, kMark };
    Kind kind = Kind::kNone;
    bool boolean = false;
    std::int64_t integer = 0;
    double real = 0.0;
    std::string text;                                  // bytes or UTF-8 string payload
    std::vector<ValuePtr> items;                       // tuple, list, set
    std::vector<std::pair<ValuePtr, ValuePtr>> entries;  // dict, or dict items set on an object
    std::string module, name;                          // global, or the class of an object
    ValuePtr args;                                     // constructor arguments of an object
    ValuePtr state;                                    // BUILD state of an object

    static ValuePtr make(Kind k) {
        auto v = std::make_shared<Value>();
        v->kind = k;
        return v;
    }
    bool is(Kind k) const { return kind == k; }
    bool is_class(std::string_view cls) const {
        return (kind == Kind::kObject || kind == Kind::kGlobal) && name == cls;
    }
    bool is_str() const { return kind == Kind::kBytes || kind == Kind::kString; }

    /// Dict lookup by string key; works on dicts and on objects with item entries.
    ValuePtr get(std::string_view key) const {
        for (const auto& [k, v] : entries)
            if (k && k->is_str() && k->text == key) return v;
        return nullptr;
    }
};

namespace detail {

inline std::string utf8_encode(std::uint32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

/// UTF-8 text whose code points are all below 256, back to raw bytes.
inline std::string utf8_to_latin1(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            out += static_cast<char>(c);
            ++i;
        } else if ((c & 0xE0) == 0xC0 && i + 1 < s.size()) {
            const unsigned cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
            if (cp > 0xFF) throw PickleError("latin-1 decode: code point above 0xFF");
            out += static_cast<char>(cp);
            i += 2;
        } else {
            throw PickleError("latin-1 decode: code point above 0xFF");
        }
    }
    return out;
}

/// Python 2 repr() string literal body (protocol 0 STRING opcode).
inline std::string unescape_repr(std::string_view lit) {
    if (lit.size() < 2 || (lit.front() != '\'' && lit.front() != '"') || lit.back() != lit.front())
        throw PickleError("STRING opcode: argument is not a quoted literal");
    lit = lit.substr(1, lit.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < lit.size(); ++i) {
        if (lit[i] != '\\') {
            out += lit[i];
            continue;
        }
        if (++i >= lit.size()) throw PickleError("STRING opcode: dangling escape");
        switch (lit[i]) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case 'a': out += '\a'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            case 'v': out += '\v'; break;
            case '\\': out += '\\'; break;
            case '\'': out += '\''; break;
            case '"': out += '"'; break;
            case 'x': {
                if (i + 2 >= lit.size()) throw PickleError("STRING opcode: short \\x escape");
                out += static_cast<char>(std::stoi(std::string(lit.substr(i + 1, 2)), nullptr, 16));
                i += 2;
                break;
            }
            default:
                if (lit[i] >= '0' && lit[i] <= '7') {
                    int v = 0, n = 0;
                    while (n < 3 && i < lit.size() && lit[i] >= '0' && lit[i] <= '7') {
                        v = v * 8 + (lit[i] - '0');
                        ++i;
                        ++n;
                    }
                    --i;
                    out += static_cast<char>(v);
                } else {
                    out += '\\';
                    out += lit[i];
                }
        }
    }
    return out;
}

/// raw-unicode-escape (protocol 0 UNICODE opcode) to UTF-8.
inline std::string decode_raw_unicode_escape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == 'u' || s[i + 1] == 'U')) {
            const std::size_t len = s[i + 1] == 'u' ? 4 : 8;
            if (i + 2 + len > s.size()) throw PickleError("UNICODE opcode: short escape");
            out += utf8_encode(static_cast<std::uint32_t>(std::stoul(std::string(s.substr(i + 2, len)), nullptr, 16)));
            i += 1 + len;
        } else {
            out += utf8_encode(static_cast<unsigned char>(s[i]));
        }
    }
    return out;
}

inline std::int64_t decode_long_le(std::string_view bytes) {
    if (bytes.empty()) return 0;
    if (bytes.size() > 8) throw PickleError("integer too large");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes.size(); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    if (bytes.size() < 8 && (static_cast<unsigned char>(bytes.back()) & 0x80))
        v |= ~std::uint64_t{0} << (8 * bytes.size());
    return static_cast<std::int64_t>(v);
}

}  // namespace detail

class Unpickler {
    using K = Value::Kind;

public:
    explicit Unpickler(std::span<const std::uint8_t> data) : data_(data) {}

    ValuePtr load() {
        while (true) {
            const std::uint8_t op = u8();
            switch (op) {
                case 0x80: u8(); break;                  // PROTO
                case 0x95: bytes(8); break;              // FRAME
                case '.': {                              // STOP
                    if (stack_.empty()) throw PickleError("STOP with empty stack");
                    return stack_.back();
                }
                case '(': push(Value::make(K::kMark)); break;
                case '0': pop(); break;
                case '1': pop_mark(); break;
                case '2': push(top()); break;
                case 'N': push(Value::make(K::kNone)); break;
                case 0x88: push(make_bool(true)); break;
                case 0x89: push(make_bool(false)); break;
                case 'I': {
                    auto line = read_line();
                    if (line == "01") push(make_bool(true));
                    else if (line == "00") push(make_bool(false));
                    else push(make_int(std::stoll(line)));
                    break;
                }
                case 'J': push(make_int(static_cast<std::int32_t>(le32()))); break;
                case 'K': push(make_int(u8())); break;
                case 'M': push(make_int(le16())); break;
                case 'L': {
                    auto line = read_line();
                    if (!line.empty() && line.back() == 'L') line.pop_back();
                    push(make_int(std::stoll(line)));
                    break;
                }
                case 0x8a: push(make_int(detail::decode_long_le(bytes(u8())))); break;
                case 0x8b: push(make_int(detail::decode_long_le(bytes(le32())))); break;
                case 'G': {
                    std::uint64_t bits = 0;
                    for (int i = 0; i < 8; ++i) bits = (bits << 8) | u8();
                    push(make_float(std::bit_cast<double>(bits)));
                    break;
                }
                case 'F': push(make_float(std::stod(read_line()))); break;
                case 'S': push(make_str(K::kBytes, detail::unescape_repr(read_line()))); break;
                case 'T': push(make_str(K::kBytes, std::string(bytes(le32())))); break;
                case 'U': push(make_str(K::kBytes, std::string(bytes(u8())))); break;
                case 'B': push(make_str(K::kBytes, std::string(bytes(le32())))); break;
                case 'C': push(make_str(K::kBytes, std::string(bytes(u8())))); break;
                case 0x8e: push(make_str(K::kBytes, std::string(bytes(le64())))); break;
                case 0x96: push(make_str(K::kBytes, std::string(bytes(le64())))); break;  // BYTEARRAY8
                case 'V': push(make_str(K::kString, detail::decode_raw_unicode_escape(read_line()))); break;
                case 'X': push(make_str(K::kString, std::string(bytes(le32())))); break;
                case 0x8c: push(make_str(K::kString, std::string(bytes(u8())))); break;
                case 0x8d: push(make_str(K::kString, std::string(bytes(le64())))); break;
                case ')': push(Value::make(K::kTuple)); break;
                case 't': {
                    auto t = Value::make(K::kTuple);
                    t->items = pop_mark();
                    push(t);
                    break;
                }
                case 0x85: case 0x86: case 0x87: {
                    const std::size_t n = op - 0x84u;
                    auto t = Value::make(K::kTuple);
                    t->items.resize(n);
                    for (std::size_t i = n; i-- > 0;) t->items[i] = pop();
                    push(t);
                    break;
                }
                case ']': push(Value::make(K::kList)); break;
                case 'l': {
                    auto l = Value::make(K::kList);
                    l->items = pop_mark();
                    push(l);
                    break;
                }
                case 'a': {
                    auto v = pop();
                    append_to(top(), {v});
                    break;
                }
                case 'e': {
                    auto vs = pop_mark();
                    append_to(top(), vs);
                    break;
                }
                case '}': push(Value::make(K::kDict)); break;
                case 'd': {
                    auto d = Value::make(K::kDict);
                    auto vs = pop_mark();
                    set_items(d, vs);
                    push(d);
                    break;
                }
                case 's': {
                    auto v = pop();
                    auto k = pop();
                    set_items(top(), {k, v});
                    break;
                }
                case 'u': {
                    auto vs = pop_mark();
                    set_items(top(), vs);
                    break;
                }
                case 0x8f: push(Value::make(K::kSet)); break;
                case 0x90: {
                    auto vs = pop_mark();
                    auto s = top();
                    s->items.insert(s->items.end(), vs.begin(), vs.end());
                    break;
                }
                case 0x91: {
                    auto s = Value::make(K::kSet);
                    s->items = pop_mark();
                    push(s);
                    break;
                }
                case 'c': {
                    auto module = read_line();
                    auto name = read_line();
                    push(make_global(std::move(module), std::move(name)));
                    break;
                }
                case 0x93: {
                    auto name = pop();
                    auto module = pop();
                    push(make_global(module->text, name->text));
                    break;
                }
                case 'R': {
                    auto args = pop();
                    auto callable = pop();
                    push(reduce(callable, args));
                    break;
                }
                case 0x81: {  // NEWOBJ
                    auto args = pop();
                    auto cls = pop();
                    push(instantiate(cls, args));
                    break;
                }
                case 0x92: {  // NEWOBJ_EX
                    pop();
                    auto args = pop();
                    auto cls = pop();
                    push(instantiate(cls, args));
                    break;
                }
                case 'o': {
                    auto vs = pop_mark();
                    if (vs.empty()) throw PickleError("OBJ without class");
                    auto args = Value::make(K::kTuple);
                    args->items.assign(vs.begin() + 1, vs.end());
                    push(instantiate(vs.front(), args));
                    break;
                }
                case 'i': {
                    auto module = read_line();
                    auto name = read_line();
                    auto args = Value::make(K::kTuple);
                    args->items = pop_mark();
                    push(instantiate(make_global(std::move(module), std::move(name)), args));
                    break;
                }
                case 'b': {
                    auto state = pop();
                    build(top(), state);
                    break;
                }
                case 'p': memo_[std::stoull(read_line())] = top(); break;
                case 'q': memo_[u8()] = top(); break;
                case 'r': memo_[le32()] = top(); break;
                case 0x94: memo_[memo_.size()] = top(); break;
                case 'g': push(memo_get(std::stoull(read_line()))); break;
                case 'h': push(memo_get(u8())); break;
                case 'j': push(memo_get(le32())); break;
                default:
                    throw PickleError("unsupported pickle opcode 0x" + hex(op) + " at offset " + std::to_string(pos_ - 1));
            }
        }
    }

private:
    static std::string hex(unsigned v) {
        const char* digits = "0123456789abcdef";
        return {digits[(v >> 4) & 0xF], digits[v & 0xF]};
    }

    std::uint8_t u8() {
        if (pos_ >= data_.size()) throw PickleError("truncated pickle");
        return data_[pos_++];
    }
    std::string_view bytes(std::uint64_t n) {
        if (n > data_.size() - pos_) throw PickleError("truncated pickle payload");
        std::string_view s(reinterpret_cast<const char*>(data_.data()) + pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t le16() { return static_cast<std::uint32_t>(u8()) | (static_cast<std::uint32_t>(u8()) << 8); }
    std::uint32_t le32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    std::uint64_t le64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return v;
    }
    std::string read_line() {
        std::string line;
        while (true) {
            const char c = static_cast<char>(u8());
            if (c == '\n') break;
            line += c;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    void push(ValuePtr v) { stack_.push_back(std::move(v)); }
    ValuePtr pop() {
        if (stack_.empty()) throw PickleError("stack underflow");
        auto v = std::move(stack_.back());
        stack_.pop_back();
        return v;
    }
    ValuePtr top() const {
        if (stack_.empty()) throw PickleError("stack underflow");
        return stack_.back();
    }
    std::vector<ValuePtr> pop_mark() {
        auto it = std::find_if(stack_.rbegin(), stack_.rend(), [](const ValuePtr& v) { return v->is(K::kMark); });
        if (it == stack_.rend()) throw PickleError("MARK not found");
        const auto mark = stack_.size() - 1 - static_cast<std::size_t>(it - stack_.rbegin());
        std::vector<ValuePtr> out(stack_.begin() + static_cast<std::ptrdiff_t>(mark) + 1, stack_.end());
        stack_.resize(mark);
        return out;
    }
    ValuePtr memo_get(std::uint64_t key) const {
        auto it = memo_.find(key);
        if (it == memo_.end()) throw PickleError("memo key " + std::to_string(key) + " missing");
        return it->second;
    }

    static ValuePtr make_bool(bool b) {
        auto v = Value::make(K::kBool);
        v->boolean = b;
        return v;
    }
    static ValuePtr make_int(std::int64_t i) {
        auto v = Value::make(K::kInt);
        v->integer = i;
        return v;
    }
    static ValuePtr make_float(double d) {
        auto v = Value::make(K::kFloat);
        v->real = d;
        return v;
    }
    static ValuePtr make_str(K kind, std::string s) {
        auto v = Value::make(kind);
        v->text = std::move(s);
        return v;
    }
    static ValuePtr make_global(std::string module, std::string name) {
        auto v = Value::make(K::kGlobal);
        v->module = std::move(module);
        v->name = std::move(name);
        return v;
    }

    static void append_to(const ValuePtr& target, const std::vector<ValuePtr>& vs) {
        if (target->is(K::kList) || target->is(K::kObject)) {
            target->items.insert(target->items.end(), vs.begin(), vs.end());
        } else {
            throw PickleError("APPEND target is not a list");
        }
    }
    static void set_items(const ValuePtr& target, const std::vector<ValuePtr>& kv) {
        if (kv.size() % 2) throw PickleError("SETITEMS with odd item count");
        if (!target->is(K::kDict) && !target->is(K::kObject)) throw PickleError("SETITEM target is not a mapping");
        for (std::size_t i = 0; i < kv.size(); i += 2) target->entries.emplace_back(kv[i], kv[i + 1]);
    }

    static ValuePtr instantiate(const ValuePtr& cls, const ValuePtr& args) {
        if (!cls->is(K::kGlobal)) throw PickleError("constructor is not a global");
        auto obj = Value::make(K::kObject);
        obj->module = cls->module;
        obj->name = cls->name;
        obj->args = args;
        return obj;
    }

    static ValuePtr reduce(const ValuePtr& callable, const ValuePtr& args) {
        if (!callable->is(K::kGlobal)) throw PickleError("REDUCE callable is not a global");
        const auto& m = callable->module;
        const auto& n = callable->name;
        if (m == "_codecs" && n == "encode") {
            if (args->items.empty() || !args->items[0]->is_str()) throw PickleError("_codecs.encode: bad arguments");
            return make_str(K::kBytes, detail::utf8_to_latin1(args->items[0]->text));
        }
        if ((m == "copy_reg" || m == "copyreg") && n == "_reconstructor") {
            if (args->items.empty()) throw PickleError("_reconstructor: missing class");
            return instantiate(args->items[0], args);
        }
        if ((m == "__builtin__" || m == "builtins") && (n == "bytes" || n == "bytearray")) {
            auto out = make_str(K::kBytes, "");
            if (!args->items.empty() && args->items[0]->is_str()) {
                out->text = args->items[0]->text;
                if (args->items[0]->is(K::kString) && args->items.size() > 1) out->text = detail::utf8_to_latin1(out->text);
            }
            return out;
        }
        if ((m == "__builtin__" || m == "builtins") && (n == "set" || n == "frozenset")) {
            auto s = Value::make(K::kSet);
            if (!args->items.empty()) s->items = args->items[0]->items;
            return s;
        }
        return instantiate(callable, args);
    }

    static void build(const ValuePtr& target, const ValuePtr& state) {
        if (target->is(K::kObject)) {
            if (!target->state) {
                target->state = state;
            } else if (target->state->is(K::kDict) && state->is(K::kDict)) {
                target->state->entries.insert(target->state->entries.end(), state->entries.begin(), state->entries.end());
            } else {
                target->state = state;
            }
            // Plain __dict__ state doubles as attribute lookup via get().
            if (state->is(K::kDict))
                target->entries.insert(target->entries.end(), state->entries.begin(), state->entries.end());
            else if (state->is(K::kTuple) && state->items.size() == 2 && state->items[0]->is(K::kDict))
                target->entries.insert(target->entries.end(), state->items[0]->entries.begin(),
                                       state->items[0]->entries.end());
            return;
        }
        if (target->is(K::kDict) && state->is(K::kDict)) {
            target->entries.insert(target->entries.end(), state->entries.begin(), state->entries.end());
            return;
        }
        throw PickleError("BUILD on unsupported target");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::vector<ValuePtr> stack_;
    std::unordered_map<std::uint64_t, ValuePtr> memo_;
};

inline ValuePtr loads(std::span<const std::uint8_t> data) { return Unpickler(data).load(); }

inline ValuePtr load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PickleError("cannot open " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return loads(data);
    } catch (const PickleError& e) {
        throw PickleError(path + ": " + e.what());
    }
}

/// numpy ndarray contents.
struct NdArray {
    std::vector<std::size_t> shape;
    char kind = 'f';  // 'f' float, 'i' signed, 'u' unsigned, 'b' bool
    std::size_t item_size = 8;
    bool big_endian = false;
    bool fortran_order = false;
    std::string data;

    std::size_t count() const {
        std::size_t c = 1;
        for (auto s : shape) c *= s;
        return c;
    }

    double at(std::size_t flat) const {
        std::uint8_t buf[8] = {};
        std::memcpy(buf, data.data() + flat * item_size, item_size);
        if (big_endian) std::reverse(buf, buf + item_size);
        switch (kind) {
            case 'f':
                if (item_size == 8) {
                    double d;
                    std::memcpy(&d, buf, 8);
                    return d;
                } else if (item_size == 4) {
                    float f;
                    std::memcpy(&f, buf, 4);
                    return f;
                }
                break;
            case 'b':
                return buf[0] ? 1.0 : 0.0;
            case 'i':
            case 'u': {
                std::uint64_t v = 0;
                for (std::size_t i = 0; i < item_size; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
                if (kind == 'i' && item_size < 8 && (buf[item_size - 1] & 0x80)) v |= ~std::uint64_t{0} << (8 * item_size);
                return kind == 'i' ? static_cast<double>(static_cast<std::int64_t>(v)) : static_cast<double>(v);
            }
        }
        throw PickleError("unsupported numpy dtype");
    }

    std::int64_t int_at(std::size_t flat) const { return static_cast<std::int64_t>(at(flat)); }

    /// Element (r, c) of a 2-D array, honoring memory order.
    double at(std::size_t r, std::size_t c) const {
        return fortran_order ? at(c * shape[0] + r) : at(r * shape[1] + c);
    }
};

namespace detail {

inline void parse_dtype(const Value& dtype, NdArray& arr) {
    if (!dtype.is(Value::Kind::kObject) || dtype.name != "dtype" || !dtype.args || dtype.args->items.empty() ||
        !dtype.args->items[0]->is_str())
        throw PickleError("ndarray: malformed dtype");
    const std::string code = dtype.args->items[0]->text;  // e.g. "f8", "i4", "b1"
    if (code.size() < 2) throw PickleError("ndarray: unsupported dtype '" + code + "'");
    arr.kind = code[0];
    arr.item_size = static_cast<std::size_t>(std::stoul(code.substr(1)));
    if (std::string_view("fiub").find(arr.kind) == std::string_view::npos || arr.item_size == 0 || arr.item_size > 8)
        throw PickleError("ndarray: unsupported dtype '" + code + "'");
    char order = '<';
    if (dtype.state && dtype.state->is(Value::Kind::kTuple) && dtype.state->items.size() > 1 &&
        dtype.state->items[1]->is_str() && !dtype.state->items[1]->text.empty())
        order = dtype.state->items[1]->text[0];
    arr.big_endian = order == '>' || (order == '=' && std::endian::native == std::endian::big);
}

inline std::vector<std::size_t> parse_shape(const Value& v) {
    std::vector<std::size_t> shape;
    if (v.is(Value::Kind::kInt)) return {static_cast<std::size_t>(v.integer)};
    for (const auto& d : v.items) shape.push_back(static_cast<std::size_t>(d->integer));
    return shape;
}

}  // namespace detail

inline NdArray as_ndarray(const ValuePtr& v) {
    NdArray arr;
    if (v && v->is(Value::Kind::kObject) && v->name == "_frombuffer" && v->args && v->args->items.size() >= 4) {
        const auto& a = v->args->items;
        detail::parse_dtype(*a[1], arr);
        arr.data = a[0]->text;
        arr.shape = detail::parse_shape(*a[2]);
        arr.fortran_order = a[3]->is_str() && a[3]->text == "F";
    } else if (v && v->is(Value::Kind::kObject) && (v->name == "_reconstruct" || v->name == "ndarray") && v->state &&
               v->state->is(Value::Kind::kTuple) && v->state->items.size() >= 5) {
        const auto& s = v->state->items;
        arr.shape = detail::parse_shape(*s[1]);
        detail::parse_dtype(*s[2], arr);
        arr.fortran_order = s[3]->is(Value::Kind::kBool) ? s[3]->boolean : s[3]->integer != 0;
        if (!s[4]->is_str()) throw PickleError("ndarray: object arrays are not supported");
        arr.data = s[4]->text;
    } else {
        throw PickleError("value is not a numpy array");
    }
    if (arr.data.size() != arr.count() * arr.item_size)
        throw PickleError("ndarray: payload has " + std::to_string(arr.data.size()) + " bytes, expected " +
                          std::to_string(arr.count() * arr.item_size));
    return arr;
}

/// Dense copy of a 2-D numpy array or a scipy CSR/CSC matrix.
inline DenseMatrix as_dense_matrix(const ValuePtr& v) {
    if (v && v->is(Value::Kind::kObject) && (v->name == "csr_matrix" || v->name == "csc_matrix" ||
                                             v->name == "csr_array" || v->name == "csc_array")) {
        auto shape_v = v->get("_shape");
        if (!shape_v) shape_v = v->get("shape");
        auto data_v = v->get("data");
        auto indices_v = v->get("indices");
        auto indptr_v = v->get("indptr");
        if (!shape_v || !data_v || !indices_v || !indptr_v) throw PickleError("sparse matrix: missing CSR fields");
        const auto shape = detail::parse_shape(*shape_v);
        if (shape.size() != 2) throw PickleError("sparse matrix: shape is not 2-D");
        const auto data = as_ndarray(data_v);
        const auto indices = as_ndarray(indices_v);
        const auto indptr = as_ndarray(indptr_v);
        const bool csr = v->name.rfind("csr", 0) == 0;
        const std::size_t major = csr ? shape[0] : shape[1];
        const std::size_t minor = csr ? shape[1] : shape[0];
        if (indptr.count() != major + 1) throw PickleError("sparse matrix: indptr length mismatch");
        DenseMatrix out(shape[0], shape[1]);
        for (std::size_t i = 0; i < major; ++i) {
            const auto begin = static_cast<std::size_t>(indptr.int_at(i));
            const auto end = static_cast<std::size_t>(indptr.int_at(i + 1));
            if (begin > end || end > data.count() || end > indices.count())
                throw PickleError("sparse matrix: indptr out of range");
            for (std::size_t k = begin; k < end; ++k) {
                const auto j = static_cast<std::size_t>(indices.int_at(k));
                if (j >= minor) throw PickleError("sparse matrix: index out of range");
                if (csr) out(i, j) += data.at(k);
                else out(j, i) += data.at(k);
            }
        }
        return out;
    }
    const auto arr = as_ndarray(v);
    if (arr.shape.size() != 2) throw PickleError("array is not 2-D");
    DenseMatrix out(arr.shape[0], arr.shape[1]);
    for (std::size_t r = 0; r < arr.shape[0]; ++r)
        for (std::size_t c = 0; c < arr.shape[1]; ++c) out(r, c) = arr.at(r, c);
    return out;
}

inline std::int64_t as_int(const ValuePtr& v) {
    if (v && v->is(Value::Kind::kInt)) return v->integer;
    if (v && v->is(Value::Kind::kBool)) return v->boolean ? 1 : 0;
    if (v && v->is(Value::Kind::kObject) && v->name == "scalar" && v->args && v->args->items.size() >= 2) {
        NdArray arr;
        detail::parse_dtype(*v->args->items[0], arr);
        arr.shape = {1};
        arr.data = v->args->items[1]->text;
        return arr.int_at(0);
    }
    throw PickleError("value is not an integer");
}

/// {node: [neighbors]} from a dict or collections.defaultdict.
inline std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> as_adjacency_lists(const ValuePtr& v) {
    if (!v || !(v->is(Value::Kind::kDict) || (v->is(Value::Kind::kObject) && v->name == "defaultdict")))
        throw PickleError("value is not a dict of lists");
    std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> out;
    out.reserve(v->entries.size());
    for (const auto& [k, list] : v->entries) {
        std::vector<std::int64_t> nbrs;
        if (!list->is(Value::Kind::kList) && !list->is(Value::Kind::kTuple) && !list->is(Value::Kind::kSet))
            throw PickleError("adjacency value is not a list");
        nbrs.reserve(list->items.size());
        for (const auto& x : list->items) nbrs.push_back(as_int(x));
        out.emplace_back(as_int(k), std::move(nbrs));
    }
    return out;
}

}  // namespace mgcmn::pickle
