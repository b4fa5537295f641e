# differentiation/management/commands/features.py
from ...experiments import resolve_dataset, subject_fnc
from ...fnc import save_fnc_table
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Строит FNC-векторы (5460 признаков) для когорты и сохраняет их таблицей CSV'

    def add_pipeline_arguments(self, parser):
        self.add_data_arguments(parser)
        parser.add_argument('--out', help='Путь к таблице FNC (CSV)')

    def run(self):
        manifest, synth = self.data_source()
        dataset = resolve_dataset(manifest, synth, self.value('fs'))
        vectors = [subject_fnc(subject) for subject in dataset]
        path = save_fnc_table(self.resolve(self.value('out', 'fnc.csv')), dataset.subject_ids, vectors)
        self.success(f'FNC для {len(vectors)} субъектов сохранены в {path}')
