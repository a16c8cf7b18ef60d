// Payload shapes mirroring the service JSON exactly. Every number the UI
// displays comes from one of these fields.

export interface RecommendResult {
  oer_id: string;
  score: number;
  hosting_formula: string;
  distance: number;
  type: string;
  title: string;
}

export interface RecommendResponse {
  request_id: string;
  anchor: string;
  results: RecommendResult[];
}

export interface SubgraphVertex {
  id: string;
  latex: string;
  distance: number;
  lg: number;
  lc: number;
}

export interface SubgraphEdge {
  src: string;
  dst: string;
  p: number;
}

export interface SubgraphResponse {
  target: string;
  vertices: SubgraphVertex[];
  edges: SubgraphEdge[];
}

export interface ProjectionCandidate {
  id: string;
  distance: number;
  features: number[];
}

export interface ProjectResponse {
  anchor: string;
  candidates: ProjectionCandidate[];
}

export interface QueryInput {
  latex: string;
  context: string;
  question?: string;
  abstract?: string;
  keywords?: string[];
  topics?: string[];
}

export type Rating = "Good" | "OK" | "Bad";

export type RatingStatus = "pending" | "acked";
