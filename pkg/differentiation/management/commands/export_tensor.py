# differentiation/management/commands/export_tensor.py
from ...exceptions import ConfigError
from ...experiments import export_tensor_slice, resolve_dataset
from ...timefreq import CwtConfig, StftConfig, TensorKind
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Сохраняет срез спектрограммы или скалограммы субъекта в CSV'

    def add_pipeline_arguments(self, parser):
        self.add_data_arguments(parser)
        parser.add_argument('--subject', help='subject_id (по умолчанию первый в наборе)')
        parser.add_argument('--kind', choices=[k.value for k in TensorKind], help='Тип тензора')
        parser.add_argument('--axis', type=int, choices=(0, 1, 2),
                            help='Ось среза: 0: частота или масштаб, 1: время, 2: ICN')
        parser.add_argument('--index', type=int, help='Индекс вдоль оси среза')
        parser.add_argument('--out', help='CSV-файл среза')

    def run(self):
        manifest, synth = self.data_source()
        dataset = resolve_dataset(manifest, synth, self.value('fs'))
        subject_id = self.value('subject') or dataset.subject_ids[0]
        if subject_id not in dataset.subject_ids:
            raise ConfigError(f'Субъект {subject_id!r} не найден в наборе')
        subject = dataset.subjects[dataset.subject_ids.index(subject_id)]
        kind = TensorKind(self.value('kind', TensorKind.SPECTROGRAM.value))
        axis = self.value('axis', 2)
        index = self.value('index', 0)
        out = self.resolve(self.value('out', f'{subject_id}_{kind.value}_axis{axis}_{index}.csv'))
        frame = export_tensor_slice(
            subject.icn, kind, axis, index, out,
            stft_cfg=StftConfig.from_dict(self.file_config.get('stft')),
            cwt_cfg=CwtConfig.from_dict(self.file_config.get('cwt')),
        )
        self.success(f'Срез {kind.value} {frame.shape[0]}×{frame.shape[1]} субъекта {subject_id} -> {out}')
