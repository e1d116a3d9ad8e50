from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('core', '0001_initial'),
    ]

    operations = [
        migrations.AlterField(
            model_name='experimentrun',
            name='seed',
            field=models.CharField(blank=True, max_length=20, null=True),
        ),
    ]
