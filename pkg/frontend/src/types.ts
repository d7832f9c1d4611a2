// JSON shapes produced by the analysis engine (bundle and trace endpoints).

export interface EncodingJSON {
  field?: string;
  type: string;
  bin?: boolean;
  aggregate?: string;
}

export interface ChartJSON {
  kind: string; // histogram | bar | line | scatter | heatmap
  spec: {
    mark: string;
    encoding: Record<string, EncodingJSON>;
  };
}

export interface TagJSON {
  reason: string; // transformation | fact
  transform?: string;
  fact_kind?: string;
  edge_epoch?: number;
  line?: number;
  score?: number;
}

export interface RecommendationJSON {
  rank: number;
  chart: ChartJSON;
  tags: TagJSON[];
  rank_key: (number | string)[];
  data?: Record<string, unknown>[];
}

export interface GraphNodeJSON {
  id: string;
  variable: string;
  cell_exec: number;
  line: number;
  epoch: number;
  has_snapshot: boolean;
  schema: string[];
  is_display: boolean;
  rows: number | null;
  sampled: boolean;
}

export interface GraphEdgeJSON {
  src: string;
  dst: string;
  transform: string;
  is_target: boolean;
  schema_changing: boolean;
}

export interface BundleJSON {
  version: number;
  notebook: string;
  trace: {
    epoch: number;
    cell_pos: number;
    exec_count: number;
    statements: { line: number; raw: string; status: string; targets: string[] }[];
  }[];
  graph: {
    nodes: GraphNodeJSON[];
    edges: GraphEdgeJSON[];
    columns: string[][];
    version_links: [string, string][];
  };
  nodes: Record<string, {
    profiles: { name: string; dtype: string; nulls: number; distinct: number }[];
    facts: { kind: string; columns: string[]; score: number }[];
    recommendations: RecommendationJSON[];
  }>;
  warnings: string[];
}

export interface TraceEntryJSON {
  status: string; // renderable | substituted | untraceable
  change: string; // changed | similar | not_applicable
  color: string;  // blue | lightblue | red
  chart?: ChartJSON;
  data?: Record<string, unknown>[];
  substitutions?: { from: string; to: string | null; edge: string }[];
  reason?: string;
}

export interface TraceJSON {
  pinned_node: string;
  chart: ChartJSON;
  nodes: Record<string, TraceEntryJSON>;
}

export interface Pin {
  node: string;
  chartIndex: number;
  chart: ChartJSON;
}
