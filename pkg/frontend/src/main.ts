import { ApiClient } from './api';
import { clusterMembership, leafCount } from './dendro';
import {
  applyError,
  applyResults,
  beginRequest,
  clearError,
  decodeState,
  encodeState,
  promoteResult,
  setCutK,
  UiState,
} from './state';
import { renderBanner, renderCards, renderClusterPanel, renderControls } from './render';
import { drawThumbnail, projectObjFront } from './thumbnail';
import { DatasetInfo } from './types';

const api = new ApiClient();

let state: UiState = decodeState(window.location.search);
let datasets: DatasetInfo[] = [];
let subjects: string[] = [];

const el = (id: string) => document.getElementById(id) as HTMLElement;

function syncUrl() {
  window.history.replaceState(null, '', '?' + encodeState(state));
}

function paintControls() {
  const current = datasets.find((d) => d.id === state.dataset);
  const types = current?.descriptor_types?.length
    ? current.descriptor_types
    : ['distance15', 'silhouette48', 'face-pca', 'sh-energy'];
  el('controls').innerHTML = renderControls(
    state,
    datasets.map((d) => d.id),
    subjects,
    types,
  );
  (el('sel-dataset') as HTMLSelectElement).onchange = async (ev) => {
    state = { ...state, dataset: (ev.target as HTMLSelectElement).value };
    await loadSubjects();
    paintControls();
    syncUrl();
  };
  (el('sel-subject') as HTMLSelectElement).onchange = (ev) => {
    state = { ...state, subject: (ev.target as HTMLSelectElement).value };
    syncUrl();
  };
  (el('sel-pose') as HTMLSelectElement).onchange = (ev) => {
    state = { ...state, pose: (ev.target as HTMLSelectElement).value };
    syncUrl();
  };
  (el('sel-type') as HTMLSelectElement).onchange = (ev) => {
    state = { ...state, type: (ev.target as HTMLSelectElement).value };
    syncUrl();
  };
  (el('sel-metric') as HTMLSelectElement).onchange = (ev) => {
    state = { ...state, metric: (ev.target as HTMLSelectElement).value };
    syncUrl();
  };
  (el('inp-k') as HTMLInputElement).onchange = (ev) => {
    state = { ...state, k: Number((ev.target as HTMLInputElement).value) || state.k };
    syncUrl();
  };
  (el('btn-query') as HTMLButtonElement).onclick = () => void runQuery();
}

function paintBanner() {
  el('banner').innerHTML = renderBanner(state.error);
  const dismiss = el('banner').querySelector('.dismiss') as HTMLButtonElement | null;
  if (dismiss) {
    dismiss.onclick = () => {
      state = clearError(state);
      paintBanner();
    };
  }
}

function paintResults() {
  el('results').innerHTML = renderCards(state.results, state.resultsStale);
  for (const card of Array.from(el('results').querySelectorAll('.card'))) {
    (card as HTMLElement).onclick = () => {
      const sid = (card as HTMLElement).dataset.subject;
      if (!sid) return;
      state = promoteResult(state, sid);
      paintControls();
      syncUrl();
      void runQuery();
    };
  }
  for (const canvas of Array.from(el('results').querySelectorAll('canvas.thumb'))) {
    const sid = (canvas as HTMLCanvasElement).dataset.subject;
    if (!sid) continue;
    api
      .meshObj(state.dataset, sid, state.pose)
      .then((obj) => drawThumbnail(canvas as HTMLCanvasElement, projectObjFront(obj)))
      .catch(() => undefined); // thumbnails are best-effort
  }
}

async function runQuery() {
  if (!state.dataset || !state.subject) return;
  state = beginRequest(state);
  const token = state.requestToken;
  try {
    const payload = await api.query({
      dataset: state.dataset,
      type: state.type,
      metric: state.metric,
      subject_id: state.subject,
      pose: state.pose,
      k: state.k,
    });
    state = applyResults(state, token, payload.matches);
  } catch (err) {
    state = applyError(state, token, err instanceof Error ? err.message : String(err));
  }
  paintBanner();
  paintResults();
  void refreshClusters();
}

async function refreshClusters() {
  if (!state.dataset || !state.subject) return;
  const metric = state.metric === 'mahalanobis' && state.type !== 'face-pca' ? 'l2' : state.metric;
  try {
    const tree = await api.dendrogram(state.dataset, state.type, metric);
    const n = leafCount(tree);
    const cutK = Math.min(state.cutK, n);
    const clusters = await api.clusters(state.dataset, state.type, metric, cutK);
    el('dendro').innerHTML = renderClusterPanel(
      { ...state, cutK },
      clusterMembership(clusters, state.subject),
      n,
    );
    const slider = el('cut-k') as HTMLInputElement;
    slider.oninput = () => {
      state = setCutK(state, Number(slider.value));
      syncUrl();
      void refreshClusters();
    };
  } catch (err) {
    state = { ...state, error: err instanceof Error ? err.message : String(err) };
    paintBanner();
  }
}

async function loadSubjects() {
  subjects = state.dataset ? await api.listSubjects(state.dataset) : [];
  if (!subjects.includes(state.subject)) {
    state = { ...state, subject: subjects[0] ?? '' };
  }
}

async function boot() {
  try {
    datasets = await api.listDatasets();
    if (!datasets.some((d) => d.id === state.dataset)) {
      state = { ...state, dataset: datasets[0]?.id ?? '' };
    }
    await loadSubjects();
    paintControls();
    syncUrl();
    if (state.subject) await runQuery();
  } catch (err) {
    state = { ...state, error: err instanceof Error ? err.message : String(err) };
    paintBanner();
  }
}

void boot();
