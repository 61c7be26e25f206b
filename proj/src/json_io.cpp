#include "treebound/json_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace treebound {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& s) {
  const nlohmann::json j = s;
  return j.dump();
}

}  // namespace

std::string manifest_json(const Manifest& manifest) {
  std::ostringstream out;
  out << "{\"subcommand\":" << quote(manifest.subcommand)
      << ",\"parameters\":{";
  for (std::size_t i = 0; i < manifest.parameters.size(); ++i) {
    if (i > 0) out << ",";
    out << quote(manifest.parameters[i].first) << ":"
        << manifest.parameters[i].second;
  }
  out << "},\"seed\":";
  if (manifest.seed.has_value()) {
    out << *manifest.seed;
  } else {
    out << "null";
  }
  out << ",\"version\":\"" << kArtifactVersion << "\",\"wall_time_ms\":"
      << format_double(manifest.wall_time_ms) << "}";
  return out.str();
}

std::string embedding_json(const Embedding& e, const Manifest* manifest) {
  std::string out;
  out.reserve(64 + e.coords.size() * 26);
  out += "{\n";
  if (manifest != nullptr) {
    out += "\"manifest\": ";
    out += manifest_json(*manifest);
    out += ",\n";
  }
  out += "\"tree_depth\": " + std::to_string(e.tree.depth) + ",\n";
  out += "\"space\": {\"p\": " + format_double(e.space.p) +
         ", \"dim\": " + std::to_string(e.space.dim) + "},\n";
  out += "\"points\": [";
  const VertexId count = e.tree.vertex_count();
  for (VertexId v = 1; v <= count; ++v) {
    out += (v == 1) ? "\n[" : ",\n[";
    const auto pt = e.point(v);
    for (int k = 0; k < e.space.dim; ++k) {
      if (k > 0) out += ",";
      out += format_double(pt[k]);
    }
    out += "]";
  }
  out += "\n]\n}\n";
  return out;
}

Embedding parse_embedding_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw DomainError("embedding file is not valid JSON: " +
                      std::string(err.what()));
  }
  try {
    const int depth = doc.at("tree_depth").get<int>();
    const auto& space_doc = doc.at("space");
    SpaceSpec space{space_doc.at("p").get<double>(),
                    space_doc.at("dim").get<int>()};
    const BinaryTree tree = build_tree(depth);
    const auto& points = doc.at("points");
    if (!points.is_array() ||
        static_cast<VertexId>(points.size()) != tree.vertex_count()) {
      throw DomainError("points array must hold " +
                        std::to_string(tree.vertex_count()) +
                        " entries, found " + std::to_string(points.size()));
    }
    std::vector<double> coords;
    coords.reserve(points.size() * space.dim);
    for (const auto& row : points) {
      if (!row.is_array() || static_cast<int>(row.size()) != space.dim) {
        throw DomainError("every point must hold exactly " +
                          std::to_string(space.dim) + " coordinates");
      }
      for (const auto& value : row) coords.push_back(value.get<double>());
    }
    return make_embedding(tree, space, std::move(coords));
  } catch (const nlohmann::json::exception& err) {
    throw DomainError("embedding file has the wrong shape: " +
                      std::string(err.what()));
  }
}

namespace {

std::string certificate_json(const ForkCertificate& cert) {
  std::ostringstream out;
  out << "{\"fork\":[" << cert.fork.a0 << "," << cert.fork.a1 << ","
      << cert.fork.a2 << "," << cert.fork.a2p << "],\"D\":"
      << format_double(cert.D) << ",\"eta\":" << format_double(cert.eta)
      << ",\"bound\":" << format_double(cert.bound) << ",\"kept\":"
      << cert.kept << ",\"kept_norm\":" << format_double(cert.kept_norm)
      << ",\"other_norm\":" << format_double(cert.other_norm) << "}";
  return out.str();
}

}  // namespace

std::string trace_json(const ExtractionTrace& trace, int tree_depth,
                       const ConvexityProfile& profile, double tau,
                       const Manifest* manifest) {
  std::ostringstream out;
  out << "{\n";
  if (manifest != nullptr) {
    out << "\"manifest\": " << manifest_json(*manifest) << ",\n";
  }
  out << "\"tree_depth\": " << tree_depth << ",\n"
      << "\"p\": " << format_double(profile.p_type) << ",\n"
      << "\"c\": " << format_double(profile.c) << ",\n"
      << "\"profile_source\": \"" << profile.source_name() << "\",\n"
      << "\"tau\": " << format_double(tau) << ",\n"
      << "\"d_sequence\": [";
  for (std::size_t i = 0; i < trace.d_sequence.size(); ++i) {
    if (i > 0) out << ",";
    out << format_double(trace.d_sequence[i]);
  }
  out << "],\n\"lower_bound\": " << format_double(trace.lower_bound)
      << ",\n\"d0_ge_lower_bound\": "
      << (trace.d0_dominates ? "true" : "false") << ",\n\"levels\": [";
  for (std::size_t i = 0; i < trace.levels.size(); ++i) {
    const auto& level = trace.levels[i];
    out << (i == 0 ? "\n" : ",\n") << "{\"depth\": " << level.depth
        << ", \"distortion\": " << format_double(level.distortion)
        << ", \"certificates\": [";
    for (std::size_t j = 0; j < level.certificates.size(); ++j) {
      if (j > 0) out << ",";
      out << certificate_json(level.certificates[j]);
    }
    out << "]}";
  }
  out << "\n],\n\"certified_statement\": " << quote(trace.certified_statement)
      << "\n}\n";
  return out.str();
}

std::string lower_bound_json(const LowerBoundResult& result) {
  std::ostringstream out;
  out << "{\"m\":" << result.m << ",\"method\":\"" << result.method_name()
      << "\",\"value\":" << format_double(result.value)
      << ",\"p\":" << format_double(result.profile.p_type)
      << ",\"c\":" << format_double(result.profile.c)
      << ",\"tau\":" << format_double(result.tau) << "}";
  return out.str();
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "m,iterative,asymptotic,ratio\n";
  for (const auto& row : rows) {
    out += std::to_string(row.m) + "," + format_double(row.iterative) + "," +
           format_double(row.asymptotic) + "," + format_double(row.ratio) +
           "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open " + path + " for writing");
  }
  out << content;
  if (!out) {
    throw Error("failed to write " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace treebound
