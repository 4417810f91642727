import { ClustersPayload, DendrogramNode } from './types';

export function collectLeaves(node: DendrogramNode): string[] {
  if (!node.children) return node.name !== undefined ? [node.name] : [];
  return node.children.flatMap(collectLeaves);
}

export function leafCount(node: DendrogramNode): number {
  return collectLeaves(node).length;
}

/** Subjects sharing a cluster with `subject`, in sorted order. */
export function clusterMembership(payload: ClustersPayload, subject: string): string[] {
  const cluster = payload.labels[subject];
  if (cluster === undefined) return [];
  return Object.keys(payload.labels)
    .filter((sid) => payload.labels[sid] === cluster)
    .sort();
}

/** Distinct cluster count, for sanity-checking a cut against its k. */
export function clusterCount(payload: ClustersPayload): number {
  return new Set(Object.values(payload.labels)).size;
}
