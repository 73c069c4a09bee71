#pragma once

#include <memory>
#include <string>

#include "json.hpp"

#include "harmonet/bratteli.hpp"
#include "harmonet/models.hpp"
#include "harmonet/transfer.hpp"

namespace harmonet::io {

using json = nlohmann::json;

/// Network spec: { "model": "line_z_unit" | ... | "explicit", "params": {...} }.
/// The explicit model embeds "edges": [[x, y, c], ...] with vertex encodings
/// as integers or strings, and an optional "origin".
models::Fixture parse_network_spec(const json& spec);
models::Fixture parse_network_file(const std::string& path);

/// Diagram spec: { "levels": K or "stationary", "incidence": [[...]] or a
/// single matrix, "conductance": {"rule": "lambda_pow_n", "lambda": l} or
/// {"rule": "explicit", "matrices": [...]} }.
bratteli::BratteliDiagram parse_diagram_spec(const json& spec);
bratteli::BratteliDiagram parse_diagram_file(const std::string& path);

/// Transfer spec: { "q0": [...], "R": [[[...]], ...] } or
/// { "fixture": "pascal_binomial", "depth": K }.
transfer::TransferSystem parse_transfer_spec(const json& spec);
transfer::TransferSystem parse_transfer_file(const std::string& path);

json load_json_file(const std::string& path);

/// Output helpers. Every file embeds the run configuration and library
/// version; identical configurations produce byte-identical files.
void write_text_file(const std::string& path, const std::string& content);
std::string vertex_function_csv(const VertexFunction& f, const json& config);
std::string sparse_laplacian_triplets(const ops::SparseLaplacian& m, const json& config);
std::string plot_columns(const std::vector<double>& x, const std::vector<double>& y,
                         const json& config);
std::string result_json(const json& payload, const json& config);

}  // namespace harmonet::io
