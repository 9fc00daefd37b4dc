#include "stealshare/dist_descriptor.hpp"

#include <charconv>
#include <sstream>

#include "stealshare/error.hpp"

namespace stealshare {

namespace {

double parse_num(std::string_view text, const char* what) {
  double value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    fail(ErrorKind::parse_error,
         std::string("could not parse ") + what + " from '" +
             std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = text.find(sep);
    parts.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return parts;
}

}  // namespace

const char* to_string(DistDescriptor::Kind kind) {
  switch (kind) {
    case DistDescriptor::Kind::hyperexp: return "hyperexp";
    case DistDescriptor::Kind::erlang: return "erlang";
    case DistDescriptor::Kind::hypoexp: return "hypoexp";
    case DistDescriptor::Kind::ph: return "ph";
  }
  return "?";
}

PhaseTypeDist DistDescriptor::build() const {
  switch (kind) {
    case Kind::hyperexp:
      return fit_hyperexp(scv, f);
    case Kind::erlang:
      return erlang(k);
    case Kind::hypoexp:
      return hypoexp(rates);
    case Kind::ph: {
      const auto n = alpha.size();
      Eigen::RowVectorXd a(static_cast<Eigen::Index>(n));
      for (size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i)) = alpha[i];
      if (S.size() != n) {
        fail(ErrorKind::unsupported_shape,
             "ph descriptor: S must have one row per alpha entry");
      }
      Eigen::MatrixXd s(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(n));
      for (size_t i = 0; i < n; ++i) {
        if (S[i].size() != n) {
          fail(ErrorKind::unsupported_shape, "ph descriptor: S must be square");
        }
        for (size_t j = 0; j < n; ++j) {
          s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              S[i][j];
        }
      }
      return PhaseTypeDist(std::move(a), std::move(s));
    }
  }
  fail(ErrorKind::unsupported_shape, "unknown descriptor kind");
}

DistDescriptor DistDescriptor::parse(std::string_view text) {
  DistDescriptor d;
  if (text == "exp" || text == "exponential") {
    d.kind = Kind::erlang;
    d.k = 1;
    return d;
  }
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view{}
                                      : text.substr(colon + 1);
  if (head == "erlang") {
    d.kind = Kind::erlang;
    const double k = parse_num(args, "erlang stage count");
    if (k < 1 || k != static_cast<int>(k)) {
      fail(ErrorKind::parse_error, "erlang stage count must be an integer >= 1");
    }
    d.k = static_cast<int>(k);
    return d;
  }
  if (head == "hyperexp") {
    d.kind = Kind::hyperexp;
    const auto parts = split(args, ':');
    if (parts.empty() || parts.size() > 2 || parts[0].empty()) {
      fail(ErrorKind::parse_error, "expected hyperexp:SCV[:F]");
    }
    d.scv = parse_num(parts[0], "hyperexp scv");
    d.f = parts.size() == 2 ? parse_num(parts[1], "hyperexp work fraction")
                            : 0.5;
    return d;
  }
  if (head == "hypoexp") {
    d.kind = Kind::hypoexp;
    for (const auto part : split(args, ',')) {
      d.rates.push_back(parse_num(part, "hypoexp rate"));
    }
    return d;
  }
  fail(ErrorKind::parse_error,
       "unknown distribution '" + std::string(text) +
           "' (expected exp, erlang:K, hyperexp:SCV[:F], hypoexp:R1,R2,..., "
           "a JSON object, or @file.json)");
}

std::string DistDescriptor::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::hyperexp:
      os << "hyperexp(scv=" << scv << ", f=" << f << ")";
      break;
    case Kind::erlang:
      os << (k == 1 ? "exponential" : "erlang") << "(k=" << k << ")";
      break;
    case Kind::hypoexp:
      os << "hypoexp(";
      for (size_t i = 0; i < rates.size(); ++i) {
        os << (i ? "," : "") << rates[i];
      }
      os << ")";
      break;
    case Kind::ph:
      os << "ph(" << alpha.size() << " phases)";
      break;
  }
  return os.str();
}

}  // namespace stealshare
