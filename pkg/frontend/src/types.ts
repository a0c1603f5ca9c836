// Wire types of the annotation API served by the pipeline binary.

export interface QueueItem {
  done: false;
  atom_id: string;
  atom_text: string;
  example_id: string;
  premise: string;
  hypothesis: string;
  update: string;
  instructions: string;
  remaining: number;
}

export interface QueueDone {
  done: true;
  remaining: number;
}

export type QueueResponse = QueueItem | QueueDone;

export interface AnnotationRecord {
  atom_id: string;
  annotator_id: string;
  valid: boolean;
  effect: number | null;
  timestamp: string;
}

export interface ProgressInfo {
  total_atoms: number;
  labeled_atoms: number;
  remaining_atoms: number;
  records: number;
  by_annotator: Record<string, number>;
}
