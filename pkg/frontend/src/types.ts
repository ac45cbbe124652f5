// Payload shapes of the session service. The console never computes
// memberships or metrics itself; everything shown comes from these fields.

export type ConditionKind = 'NF' | 'VF' | 'VR' | 'RF' | 'BF' | 'SF';

export interface ScenarioInfo {
  id: string;
  kind: 'maze' | 'pickplace';
  name: string;
  conditions: ConditionKind[];
  test_items: number;
}

export interface SessionHandle {
  session_id: string;
  condition: ConditionKind;
  state: 'Teaching' | 'Stopped';
  scenario_id: string;
  test_items: number;
}

export interface Classification {
  label: string;
  delta_nu: number;
  similarity: number;
}

export interface TrajectoryPayload {
  t: number[];
  pos: number[][];
  gripper?: number[];
  action_marks?: [number, number];
}

export interface RealizationPayload {
  test_item: number;
  membership: { is_member: boolean; violated: string[] };
  trajectory: TrajectoryPayload;
}

// NF responses carry only ok/demo_count/state; richer fields appear only
// when the condition permits them.
export interface StepResponse {
  ok: boolean;
  demo_count: number;
  state: string;
  condition: ConditionKind;
  classification?: Classification;
  nu?: number;
  eta?: number;
  outcomes?: boolean[];
  svg?: string;
  realizations?: RealizationPayload[];
}

export interface StepMetrics {
  step: number;
  nu: number;
  eta: number;
  classification: Classification;
}

export interface FinalReport {
  state: 'Stopped';
  report: {
    steps: StepMetrics[];
    final_eta: number;
    plain_eta: number;
    eta_demo_count: number;
    totals: Record<string, number>;
  };
  outcomes: boolean[];
}
